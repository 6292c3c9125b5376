#pragma once

#include <optional>
#include <vector>

#include "covkit/kernel.hpp"
#include "covkit/mixtures.hpp"

namespace covkit {

/// exp(-t gamma) entrywise. Claims PD (and infinite divisibility) when gamma
/// claims CND.
KernelSpec schoenberg_exp(const KernelSpec& gamma, double t);

/// Gamma(h + z) + Gamma(h - z) - 2 Gamma(h), evaluated as
/// Gamma(x + z, y) + Gamma(x - z, y) - 2 Gamma(x, y).
KernelSpec increment_cov(const KernelSpec& gamma, const Eigen::VectorXd& z);

/// (1 + g(h + z)) (1 + g(h - z)) / (1 + g(h))^2 + c, entrywise, c >= -1.
KernelSpec ratio_product_model(const KernelSpec& gamma, const Eigen::VectorXd& z, double c);

/// One term Sigma_l * gamma_l(u) of A_ij(u).
struct GaussianComponent {
  Eigen::MatrixXd sigma;  // d x d, symmetric PSD
  KernelSpec gamma;       // pseudo cross-variogram on R^k
};

/// |A_ij(u)|^(-1/2) exp(-h^T A_ij(u)^(-1) h / 2) with
/// A_ij(u) = Sigma + sum_l gamma^l_ij(u) Sigma_l.
KernelSpec gaussian_extended(int m, Domain domain, const Eigen::MatrixXd& sigma,
                             const std::vector<GaussianComponent>& components);

/// |A_ij(u)|^(-1/2) sum_nodes weight f_ij exp(-t q) with
/// q = (h + theta u)^T A_ij(u)^(-1) (h + theta u) / 2, on R^d x R.
KernelSpec lagrangian_mixture(int m, Domain domain, const Eigen::MatrixXd& sigma,
                              const std::vector<GaussianComponent>& components,
                              const Eigen::VectorXd& theta, const Mixture1D& mix);

enum class RadialProfile {
  identity,       // g(t) = t
  one_minus_exp,  // g(t) = 1 - exp(-t)
  power_shift,    // g(t) = (1 + t)^beta - 1, beta in (0, 1]
};

std::string_view to_string(RadialProfile p);
RadialProfile radial_profile_from_string(std::string_view name);

/// Profile g_ij(t) = coef * g(t / scale) + (B_ii + B_jj) / 2 - B_ij exp(-t / cross_scale)
/// of an isotropic pseudo cross-variogram g_ij(||h||^2) valid in every
/// dimension. The construction returns C_ij(h) = g'_ij(||h||^2).
struct IsotropicProfile {
  RadialProfile kind = RadialProfile::identity;
  double beta = 0.5;
  double scale = 1.0;
  double coef = 1.0;
  std::optional<Eigen::MatrixXd> cross;  // PSD matrix B
  double cross_scale = 1.0;

  double value(int i, int j, double t) const;
  double derivative(int i, int j, double t) const;
};

KernelSpec isotropic_descent(int m, Domain domain, const IsotropicProfile& profile);

}  // namespace covkit
