#pragma once

#include <vector>

#include "covkit/kernel.hpp"
#include "covkit/mixtures.hpp"

namespace covkit {

/// s^(nu+1) B(g + 1, nu + 1) (1 - ||x - y|| / s)_+^(nu + g + 1), g = gamma_ij(x, y).
/// Exactly zero when ||x - y|| >= s. Requires nu >= (d + k + 1) / 2 and
/// gamma >= 0 at every evaluated pair.
KernelSpec askey_beta(const KernelSpec& gamma, double s, double nu);

enum class SigmaForm { constant, scaled_identity, rotating_ellipse };

/// Local anisotropy Sigma_i(x) and smoothness nu_i(x) of one variable.
///   constant:         Sigma(x) = matrix (symmetric PD)
///   scaled_identity:  Sigma(x) = exp(log_scale + <log_scale_slope, x>) I
///   rotating_ellipse: Sigma(x) = R(a(x)) diag(l1^2, l2^2) R(a(x))^T, d = 2,
///                     a(x) = angle + <angle_slope, x>
///   nu(x) = nu + <nu_slope, x>, must stay positive where evaluated.
struct VariableField {
  SigmaForm form = SigmaForm::scaled_identity;
  Eigen::MatrixXd matrix;
  double log_scale = 0.0;
  Eigen::VectorXd log_scale_slope;
  double angle = 0.0;
  Eigen::VectorXd angle_slope;
  double l1 = 1.0, l2 = 1.0;
  double nu = 1.0;
  Eigen::VectorXd nu_slope;

  Eigen::MatrixXd sigma(PointView x) const;
  double smoothness(PointView x) const;
  bool constant_smoothness() const { return nu_slope.size() == 0 || nu_slope.isZero(0.0); }
};

struct LocalAnisotropyField {
  std::vector<VariableField> variables;

  void validate(int m, int d) const;
  nlohmann::json to_json() const;
  static LocalAnisotropyField from_json(const nlohmann::json& j);
  static LocalAnisotropyField identity(int m, int d, double nu = 1.0);
};

/// Determinant prefactor |S_i|^(1/4) |S_j|^(1/4) / |(S_i + S_j) / 2|^(1/2)
/// and Mahalanobis form (x - y)^T ((S_i + S_j) / 2)^(-1) (x - y).
struct AnisotropyTerms {
  double prefactor = 1.0;
  double quadratic_form = 0.0;
};
AnisotropyTerms anisotropy_terms(const Eigen::MatrixXd& si, const Eigen::MatrixXd& sj,
                                 PointView x, PointView y);

/// prefactor * sum_t w_t exp(-t (QF + gamma_ij(x, y))).
KernelSpec paciorek_mixture(const LocalAnisotropyField& field, const KernelSpec& gamma,
                            const Mixture1D& mix);

/// prefactor * 2^nubar M_nubar(sqrt(QF + G_ij(x, y))), nubar = (nu_i(x) + nu_j(y)) / 2,
/// M_nu(r) = 2^(1-nu) / Gamma(nu) r^nu K_nu(r). With gamma_factor the value is
/// additionally multiplied by Gamma(nubar), which is the exact Laplace mixture.
KernelSpec nonstationary_matern(const LocalAnisotropyField& field, const KernelSpec& g,
                                bool gamma_factor = false);

/// 2^nu M_nu(r) with the limit 2^nu at r = 0.
double scaled_whittle_matern(double nu, double r);

}  // namespace covkit
