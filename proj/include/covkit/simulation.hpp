#pragma once

#include <cstdint>
#include <vector>

#include "covkit/kernel.hpp"

namespace covkit {

struct Realization {
  std::vector<Point> points;
  Eigen::MatrixXd values;  // n x m
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
  double jitter_applied = 0.0;
};

/// Zero-mean Gaussian draws with covariance Gram + j I. Realization r uses
/// its own stream seeded from (seed, r), so the output does not depend on the
/// thread count. Unless force is set, a Gram matrix with minimum eigenvalue
/// below -1e-8 max|eigenvalue| is rejected with NotPsdError.
std::vector<Realization> sample_gaussian(const KernelSpec& spec, const PointSet& pts, int n_real,
                                         std::uint64_t seed, bool force = false);

struct EmpiricalPcv {
  std::vector<Eigen::VectorXd> lags;
  std::vector<Eigen::MatrixXd> estimates;  // NaN for empty bins
  std::vector<Eigen::MatrixXd> std_errors;  // batch standard errors, NaN if unavailable
  std::vector<long> counts;  // location pairs per bin
};

/// gamma_ij(h) = sum (Z_i(x + h) - Z_j(x))^2 / (2 N n_real) over realizations
/// and location pairs whose difference matches h within `radius` in every
/// coordinate. Standard errors come from splitting the realizations into
/// `batches` contiguous groups (0 selects min(n_real, 20)).
EmpiricalPcv empirical_pcv(const std::vector<Realization>& reals, const std::vector<Eigen::VectorXd>& lags,
                           double radius = 1e-9, int batches = 0);

/// (C_ii(0) + C_jj(0)) / 2 - C_ij(h) with C(h) = C(h, 0) for a stationary spec.
Eigen::MatrixXd theoretical_pcv(const KernelSpec& spec, const Eigen::VectorXd& lag);

}  // namespace covkit
