#pragma once

#include <optional>
#include <vector>

#include "covkit/kernel.hpp"

namespace covkit {

/// sill * ||(x - y) / scale||^alpha for alpha in (0, 2]. The sill is a single
/// scalar shared by every pair (i, j).
KernelSpec pcv_power(int m, Domain domain, double alpha, double scale = 1.0, double sill = 1.0);

/// sill * (1 - exp(-||(x - y) / scale||^2)); a smooth bounded variogram.
KernelSpec pcv_gaussian(int m, Domain domain, double scale = 1.0, double sill = 1.0);

/// g(x) = c0 + <linear, x> + quadratic * ||x||^2.
struct GFunction {
  double c0 = 0.0;
  Eigen::VectorXd linear;  // empty means zero
  double quadratic = 0.0;

  double operator()(PointView x) const;
  bool is_constant() const;
};

/// gamma_ij(x, y) = g_i(x) + g_j(y) - C_ij(x, y). Claims CND when C claims PD
/// and a pseudo-variogram when additionally 2 g_i(x) = C_ii(x, x) is evident
/// (constant g and stationary C matching at the origin).
KernelSpec pcv_g_and_c(std::vector<GFunction> g, const KernelSpec& c);

/// Same construction with g_i(x) = C_ii(x, x) / 2, which always yields a
/// pseudo cross-variogram.
KernelSpec pcv_g_and_c_half_diagonal(const KernelSpec& c);

/// rho_ij * gamma(x, y) for a univariate variogram gamma (m = 1) and a PSD
/// matrix rho; a (non-stationary) cross-variogram of a coregionalized field.
KernelSpec coregionalized(const KernelSpec& gamma, const Eigen::MatrixXd& rho);

/// Pseudo cross-variogram induced by a cross-variogram tilde_gamma:
/// tg_ii(x,0) + tg_jj(y,0) - (tg_ij(x,0) + tg_ij(y,0) - tg_ij(x,y)).
KernelSpec pcv_cross_variogram(const KernelSpec& tilde_gamma);

/// gamma0(h) + (C_ii(0) + C_jj(0)) / 2 - C_ij(h) with gamma0 univariate and C
/// stationary.
KernelSpec pcv_oesting(const KernelSpec& gamma0, const KernelSpec& c);

/// gamma_ij(x, y) = gamma0(x - tau_i, y - tau_j), i.e. Z_i(x) = Y(x - tau_i).
/// Each delay has length d + k.
KernelSpec pcv_delay(const KernelSpec& gamma0, const std::vector<Eigen::VectorXd>& delays);

enum class BernsteinKind { log1p, power, scale, rational };

/// Whitelisted Bernstein functions vanishing at zero.
struct BernsteinTransform {
  BernsteinKind kind = BernsteinKind::log1p;
  double param = 1.0;  // beta for power, s for scale, lambda for rational

  static BernsteinTransform log1p() { return {BernsteinKind::log1p, 1.0}; }
  static BernsteinTransform power(double beta) { return {BernsteinKind::power, beta}; }
  static BernsteinTransform scale(double s) { return {BernsteinKind::scale, s}; }
  static BernsteinTransform rational(double lambda) { return {BernsteinKind::rational, lambda}; }

  double operator()(double t) const;
  /// f, f', f'' at t; throws for power(beta < 1) at t = 0.
  void derivatives(double t, double& f0, double& f1, double& f2) const;
  bool smooth() const { return kind != BernsteinKind::power || param == 1.0; }
};

std::string_view to_string(BernsteinKind kind);
BernsteinKind bernstein_kind_from_string(std::string_view name);

KernelSpec pcv_bernstein(const KernelSpec& model, BernsteinTransform t);

/// gamma_S(h) + gamma_T(u) on R^{d + k}.
KernelSpec pcv_nested_spacetime(const KernelSpec& spatial, const KernelSpec& temporal);

/// gamma(h - v u) on R^d x R.
KernelSpec pcv_transport(const KernelSpec& spatial, const Eigen::VectorXd& velocity);

}  // namespace covkit
