#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "covkit/kernel.hpp"

namespace covkit {

struct ValidationConfig {
  int n_configs = 20;
  int n_points_max = 12;
  double tol_rel = 1e-8;
  std::uint64_t seed = 0;
  double box_lo = -1.0;
  double box_hi = 1.0;
  double coincident_fraction = 0.1;

  void validate() const;
  nlohmann::json to_json() const;
};

enum class Verdict { pass, fail, inconclusive };
std::string_view to_string(Verdict v);

enum class CheckMode { pd, cnd };

struct Witness {
  std::vector<Point> points;
  Eigen::VectorXd coefficients;  // length n m, ordered (point, variable)
  int config_index = -1;
};

struct ValidationReport {
  std::string mode;
  Verdict verdict = Verdict::pass;
  /// Minimum eigenvalue (pd) or maximum contrast eigenvalue (cnd) of the worst
  /// configuration, and the max |eigenvalue| of its Gram matrix.
  double worst_value = 0.0;
  double scale = 0.0;
  int configs_checked = 0;
  std::optional<Witness> witness;
  std::vector<std::string> notes;

  /// worst_value / scale, 0 when scale is 0.
  double relative() const { return scale > 0.0 ? worst_value / scale : 0.0; }
  nlohmann::json to_json() const;
};

/// Deterministic random configuration number `index`: 2..n_points_max points
/// drawn by stratified sampling per coordinate, with a duplicated point in
/// about coincident_fraction of the configurations.
PointSet draw_configuration(Domain domain, const ValidationConfig& cfg, int index);

/// Minimum eigenvalue (pd) or maximum eigenvalue of P G P with
/// P = I - e e^T / (n m) (cnd) for one point set.
struct ConfigResult {
  double value = 0.0;
  double scale = 0.0;
  Eigen::VectorXd vector;
};
ConfigResult evaluate_configuration(const KernelSpec& spec, const PointSet& pts, CheckMode mode);

ValidationReport check_pd(const KernelSpec& spec, const ValidationConfig& cfg);
ValidationReport check_cnd(const KernelSpec& spec, const ValidationConfig& cfg);

/// check_cnd, |gamma_ii(x, x)| <= 1e-12 at 100 random x, and
/// gamma_ij(x, y) = gamma_ji(y, x) to 1e-12 at 100 random pairs.
ValidationReport check_pseudo_variogram(const KernelSpec& spec, const ValidationConfig& cfg);

/// check_pd of exp(-t gamma) for every t in the grid.
ValidationReport schoenberg_roundtrip(const KernelSpec& gamma, const std::vector<double>& t_grid,
                                      const ValidationConfig& cfg);

/// Runs check_cnd and schoenberg_roundtrip on the same configurations. A
/// disagreement between the two verdicts is reported as inconclusive.
ValidationReport schoenberg_equivalence(const KernelSpec& gamma, const std::vector<double>& t_grid,
                                        const ValidationConfig& cfg);

/// Random search followed by coordinate-wise descent on the n_restarts worst
/// configurations.
ValidationReport adversarial_search(const KernelSpec& spec, const ValidationConfig& cfg,
                                    CheckMode mode, int n_restarts = 3);

}  // namespace covkit
