#include "covkit/derivatives.hpp"

#include <cmath>
#include <limits>

#include "covkit/detail/common.hpp"

namespace covkit {

using detail::require;

std::string_view to_string(DerivativeMode mode) {
  return mode == DerivativeMode::closed ? "closed" : "numeric";
}

DerivativeMode derivative_mode_from_string(std::string_view name) {
  if (name == "closed") return DerivativeMode::closed;
  if (name == "numeric") return DerivativeMode::numeric;
  throw SpecError("unknown derivative mode '" + std::string(name) + "'");
}

std::string_view to_string(CmKind kind) { return kind == CmKind::exp ? "exp" : "inverse_power"; }

CmKind cm_kind_from_string(std::string_view name) {
  if (name == "exp") return CmKind::exp;
  if (name == "inverse_power") return CmKind::inverse_power;
  throw SpecError("unknown completely monotone function '" + std::string(name) + "'");
}

double CmFunction::value(double t) const {
  return kind == CmKind::exp ? std::exp(-t) : std::pow(1.0 + t, -lambda);
}

double CmFunction::derivative(double t) const {
  return kind == CmKind::exp ? -std::exp(-t) : -lambda * std::pow(1.0 + t, -lambda - 1.0);
}

NumericPartials numeric_partials(const Node& node, PointView x, PointView y, int coord) {
  const double h = std::pow(std::numeric_limits<double>::epsilon(), 1.0 / 6.0) *
                   (1.0 + std::abs(x[coord]));
  Point xs(x.begin(), x.end());
  auto at = [&](double offset) {
    xs[coord] = x[coord] + offset;
    return node.evaluate(xs, y);
  };
  const Block f0 = node.evaluate(x, y);
  const Block fp = at(h), fm = at(-h), fp2 = at(0.5 * h), fm2 = at(-0.5 * h);
  const Block d1_h = (fp - fm) / (2.0 * h);
  const Block d1_h2 = (fp2 - fm2) / h;
  const Block d2_h = (fp + fm - 2.0 * f0) / (h * h);
  const Block d2_h2 = (fp2 + fm2 - 2.0 * f0) / (0.25 * h * h);
  NumericPartials out;
  out.partials.value = f0;
  out.partials.first = (4.0 * d1_h2 - d1_h) / 3.0;
  out.partials.second = (4.0 * d2_h2 - d2_h) / 3.0;
  out.first_error = (d1_h2 - d1_h).cwiseAbs() / 3.0;
  out.second_error = (d2_h2 - d2_h).cwiseAbs() / 3.0;
  return out;
}

namespace {

Partials partials_for(const Node& node, PointView x, PointView y, int coord, DerivativeMode mode) {
  if (mode == DerivativeMode::closed) return node.partials(x, y, coord);
  return numeric_partials(node, x, y, coord).partials;
}

class SecondDerivativeNode final : public Node {
 public:
  SecondDerivativeNode(const KernelSpec& gamma, int axis, DerivativeMode mode)
      : Node("second_derivative", gamma.m(), gamma.domain(), {gamma}), axis_(axis), mode_(mode) {
    if (axis_ < 0 || axis_ >= domain().total())
      throw ShapeError("second_derivative: axis out of range");
    if (mode_ == DerivativeMode::closed && !gamma.node().differentiable(axis_))
      throw SpecError("second_derivative: '" + std::string(gamma.op()) +
                      "' has no closed-form second partials; use numeric mode");
    claims_.positive_definite = gamma.claims().pseudo_variogram && gamma.stationary();
  }
  Block evaluate(PointView x, PointView y) const override {
    return partials_for(children()[0].node(), x, y, axis_, mode_).second;
  }
  nlohmann::json params() const override {
    return {{"axis", axis_}, {"mode", std::string(to_string(mode_))}};
  }

 private:
  int axis_;
  DerivativeMode mode_;
};

class CmDerivativeNode final : public Node {
 public:
  CmDerivativeNode(const KernelSpec& gamma, CmFunction l, DerivativeMode mode)
      : Node("cm_derivative", gamma.m(), gamma.domain(), {gamma}), l_(l), mode_(mode) {
    if (domain().time != 1) throw ShapeError("cm_derivative: needs exactly one time coordinate");
    if (l_.kind == CmKind::inverse_power)
      require(l_.lambda > 0.0 && std::isfinite(l_.lambda), "cm_derivative: lambda must be positive");
    if (mode_ == DerivativeMode::closed && !gamma.node().differentiable(domain().space))
      throw SpecError("cm_derivative: '" + std::string(gamma.op()) +
                      "' has no closed-form time derivatives; use numeric mode");
    claims_.positive_definite = gamma.claims().pseudo_variogram && gamma.stationary();
  }
  Block evaluate(PointView x, PointView y) const override {
    const Partials p = partials_for(children()[0].node(), x, y, domain().space, mode_);
    Block out(m(), m());
    for (int i = 0; i < m(); ++i)
      for (int j = 0; j < m(); ++j) {
        const double g = p.value(i, j);
        if (l_.kind == CmKind::inverse_power && g <= -1.0)
          throw DomainError("cm_derivative: variogram value <= -1");
        out(i, j) = l_.value(g) * p.second(i, j) + l_.derivative(g) * p.first(i, j) * p.first(i, j);
      }
    return out;
  }
  nlohmann::json params() const override {
    nlohmann::json j{{"L", std::string(to_string(l_.kind))}, {"mode", std::string(to_string(mode_))}};
    if (l_.kind == CmKind::inverse_power) j["lambda"] = l_.lambda;
    return j;
  }

 private:
  CmFunction l_;
  DerivativeMode mode_;
};

}  // namespace

KernelSpec second_derivative_cov(const KernelSpec& gamma, int axis, DerivativeMode mode) {
  return KernelSpec(std::make_shared<SecondDerivativeNode>(gamma, axis, mode));
}

KernelSpec cm_derivative_cov(const KernelSpec& gamma, CmFunction l, DerivativeMode mode) {
  return KernelSpec(std::make_shared<CmDerivativeNode>(gamma, l, mode));
}

}  // namespace covkit
