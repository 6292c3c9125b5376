#pragma once

#include "covkit/kernel.hpp"

namespace covkit {

enum class DerivativeMode { closed, numeric };

std::string_view to_string(DerivativeMode mode);
DerivativeMode derivative_mode_from_string(std::string_view name);

/// Central-difference derivatives of a kernel with respect to coordinate
/// `coord` of its first argument, with one Richardson level. The step is
/// eps^(1/6) (1 + |x_coord|).
struct NumericPartials {
  Partials partials;
  Block first_error;   // |D(h) - D(h/2)| based estimates
  Block second_error;
};
NumericPartials numeric_partials(const Node& node, PointView x, PointView y, int coord);

/// C_ij(h) = d^2 gamma_ij / dh_axis^2 (axis is 0-based). Closed mode needs a
/// family with analytic second partials.
KernelSpec second_derivative_cov(const KernelSpec& gamma, int axis,
                                 DerivativeMode mode = DerivativeMode::closed);

enum class CmKind { exp, inverse_power };

/// Completely monotone L: exp(-t) or (1 + t)^(-lambda).
struct CmFunction {
  CmKind kind = CmKind::exp;
  double lambda = 1.0;

  double value(double t) const;
  double derivative(double t) const;
};

std::string_view to_string(CmKind kind);
CmKind cm_kind_from_string(std::string_view name);

/// C_ij = L(gamma_ij) d^2_u gamma_ij + L'(gamma_ij) (d_u gamma_ij)^2 for a
/// space-time gamma on R^d x R.
KernelSpec cm_derivative_cov(const KernelSpec& gamma, CmFunction l,
                             DerivativeMode mode = DerivativeMode::closed);

}  // namespace covkit
