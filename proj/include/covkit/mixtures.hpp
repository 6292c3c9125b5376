#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "covkit/kernel.hpp"

namespace covkit {

/// Gauss-Legendre rule with n nodes mapped to [a, b].
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
QuadratureRule gauss_legendre(int n, double a, double b);

/// One node of a two-dimensional mixture: exp(-v x - w y) weighted by
/// weight * density (an m x m symmetric PSD matrix).
struct MixtureNode2D {
  double v = 0.0;
  double w = 0.0;
  double weight = 1.0;
  Eigen::MatrixXd density;
};

/// One node of a one-dimensional mixture over (0, inf). An empty density
/// stands for the scalar 1 (all-ones matrix).
struct MixtureNode1D {
  double t = 1.0;
  double weight = 1.0;
  Eigen::MatrixXd density;
};

struct Mixture1D {
  std::vector<MixtureNode1D> nodes;

  static Mixture1D single(double t = 1.0, double weight = 1.0);
  /// Checks positivity of nodes and weights and, for matrix densities, that
  /// each is an m x m symmetric PSD matrix.
  void validate(int m) const;
  double density(std::size_t node, int i, int j) const;
  nlohmann::json to_json() const;
  static Mixture1D from_json(const nlohmann::json& j);
};

enum class DensityFamily {
  hessian_toy,  // Hessian of v^2 / w (m = 2)
  constant,     // a fixed PSD matrix
};

/// Mixing measure for laplace2d_mixture: either explicit nodes or a density
/// family integrated by tensor Gauss-Legendre on a box.
struct MixtureParams {
  std::vector<MixtureNode2D> nodes;

  std::optional<DensityFamily> family;
  Eigen::MatrixXd constant_density;
  double v_lo = 1.0, v_hi = 2.0, w_lo = 1.0, w_hi = 2.0;
  int order = 16;

  static MixtureParams explicit_nodes(std::vector<MixtureNode2D> nodes);
  static MixtureParams density_on_box(DensityFamily family, double v_lo, double v_hi,
                                      double w_lo, double w_hi, int order = 16,
                                      Eigen::MatrixXd constant_density = {});

  /// Expands to explicit nodes; `order` overrides the rule size when > 0.
  std::vector<MixtureNode2D> resolve(int m, int order_override = 0) const;
};

std::string_view to_string(DensityFamily family);
DensityFamily density_family_from_string(std::string_view name);

/// Density of the toy Hessian family at (v, w).
Eigen::Matrix2d hessian_toy_density(double v, double w);

/// C_ij(h, u) = sum_nodes weight f_ij exp(-v gS_ij(h) - w gT_ij(u)). The
/// density matrix must be PSD at every node; the error names the node.
KernelSpec laplace2d_mixture(const KernelSpec& gs, const KernelSpec& gt, const MixtureParams& mix);

/// Node-doubling estimate: max |C(order) - C(2 order)| at (x, y). Zero for
/// explicit nodes.
double laplace2d_error_estimate(const KernelSpec& mixture, PointView x, PointView y);

/// Closed-form Laplace transforms of the toy Hessian family on (1,2)^2.
/// Entry (i, j) with i, j in {0, 1}; removable singularities at x = 0 or
/// y = 0 are handled by series.
double toy_ei_laplace(int i, int j, double x, double y);

/// C_ij(h, u) = L_ij(gS_ij(h), gT_ij(u)) with the toy closed forms (m = 2).
KernelSpec toy_ei_model(const KernelSpec& gs, const KernelSpec& gt);

enum class LaplaceKind { point_mass, gamma, gig };

/// Laplace transform t -> E exp(-t X) of a non-negative random variable.
///   point_mass(a):        exp(-a t)
///   gamma(shape, rate):   (1 + t / rate)^(-shape)
///   gig(lambda, a, delta) for the density x^(lambda-1) exp(-a x - delta / x):
///       (a / (a + t))^(lambda / 2) K_lambda(2 sqrt((a + t) delta)) / K_lambda(2 sqrt(a delta))
struct LaplaceTransform1D {
  LaplaceKind kind = LaplaceKind::point_mass;
  double p1 = 0.0, p2 = 0.0, p3 = 0.0;

  static LaplaceTransform1D point_mass(double at = 0.0) { return {LaplaceKind::point_mass, at}; }
  static LaplaceTransform1D gamma(double shape, double rate) {
    return {LaplaceKind::gamma, shape, rate};
  }
  static LaplaceTransform1D exponential(double rate) { return gamma(1.0, rate); }
  static LaplaceTransform1D gig(double lambda, double a, double delta) {
    return {LaplaceKind::gig, lambda, a, delta};
  }

  void validate() const;
  double operator()(double t) const;
  nlohmann::json to_json() const;
  static LaplaceTransform1D from_json(const nlohmann::json& j);
};

/// (x, y) -> L0(x + y) L1(x) L2(y) for independent X0, X1, X2.
struct TripleLaplace {
  LaplaceTransform1D l0, l1, l2;
  double operator()(double x, double y) const { return l0(x + y) * l1(x) * l2(y); }
  nlohmann::json to_json() const;
  static TripleLaplace from_json(const nlohmann::json& j);
};

KernelSpec triple_laplace(const KernelSpec& gs, const KernelSpec& gt, const TripleLaplace& l);

struct FonsecaParams {
  double a0 = 1.0, a1 = 1.0, a2 = 1.0;
  double lambda0 = 1.0, lambda1 = 1.0, lambda2 = 1.0;
  double delta = 1.0;
};

KernelSpec fonseca_steel(const KernelSpec& gs, const KernelSpec& gt, const FonsecaParams& p);

/// Matern mixture with nu_ij = (nu_ii + nu_jj) / 2. The analytic limit
/// 2^(nu-1) Gamma(nu) (1 + gT)^(-nu) is used only where gS is exactly zero or
/// the Bessel function overflows.
KernelSpec matern_mixture(const KernelSpec& gs, const KernelSpec& gt, const Eigen::VectorXd& nu);

/// Velocity distribution for transport_mixture.
struct VelocitySampler {
  enum class Kind { fixed, normal } kind = Kind::fixed;
  Eigen::VectorXd mean;  // length d1 + d2
  double sd = 1.0;

  std::vector<Eigen::VectorXd> draw(int n, std::uint64_t seed) const;
  nlohmann::json to_json() const;
  static VelocitySampler from_json(const nlohmann::json& j);
};

/// C_ij(h, u) = mean over frozen draws V of L(g1_ij(h1 - V1 u), g2_ij(h2 - V2 u))
/// on R^{d1 + d2} x R.
KernelSpec transport_mixture(const KernelSpec& g1, const KernelSpec& g2, const TripleLaplace& l,
                             const VelocitySampler& sampler, int n_mc, std::uint64_t seed);

}  // namespace covkit
