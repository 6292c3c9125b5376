#pragma once

#include "covkit/kernel.hpp"

namespace covkit {

/// (1 + b gamma) / (1 + a gamma) entrywise, a > 0, 0 <= b <= a. Claims
/// infinite divisibility for a pseudo cross-variogram gamma.
KernelSpec infdiv_ratio(const KernelSpec& gamma, double a, double b);

/// C^r entrywise, r > 0. Claims PD only when the child claims infinite
/// divisibility; otherwise the result is unvalidated.
KernelSpec hadamard_power(const KernelSpec& spec, double r);

/// cosh(nu sqrt(gamma)) / cosh(sqrt(gamma)) entrywise, nu in [0, 1].
KernelSpec cosh_ratio(const KernelSpec& gamma, double nu);

/// Overflow-free evaluation of cosh(nu s) / cosh(s) for s >= 0.
double cosh_ratio_value(double nu, double s);

}  // namespace covkit
