#include "covkit/infdiv.hpp"

#include <cmath>

#include "covkit/detail/common.hpp"

namespace covkit {

using detail::require;

double cosh_ratio_value(double nu, double s) {
  // e^{(nu-1)s} (1 + e^{-2 nu s}) / (1 + e^{-2 s})
  return std::exp((nu - 1.0) * s) * (1.0 + std::exp(-2.0 * nu * s)) / (1.0 + std::exp(-2.0 * s));
}

namespace {

double nonnegative(double g, const char* op) {
  if (g < 0.0) {
    if (g > -1e-12) return 0.0;
    throw DomainError(std::string(op) + ": negative variogram value");
  }
  return g;
}

class InfDivRatioNode final : public detail::EntrywiseNode {
 public:
  InfDivRatioNode(const KernelSpec& gamma, double a, double b)
      : EntrywiseNode("infdiv_ratio", gamma), a_(a), b_(b) {
    require(a_ > 0.0 && std::isfinite(a_), "infdiv_ratio: a must be positive");
    require(b_ >= 0.0 && std::isfinite(b_), "infdiv_ratio: b must be >= 0");
    require(b_ <= a_, "infdiv_ratio: b > a is not infinitely divisible");
    const bool ok = gamma.claims().pseudo_variogram;
    claims_.positive_definite = ok;
    claims_.infinitely_divisible = ok;
  }
  double apply(double g) const override {
    g = nonnegative(g, "infdiv_ratio");
    return (1.0 + b_ * g) / (1.0 + a_ * g);
  }
  nlohmann::json params() const override { return {{"a", a_}, {"b", b_}}; }

 private:
  double a_, b_;
};

class HadamardPowerNode final : public detail::EntrywiseNode {
 public:
  HadamardPowerNode(const KernelSpec& spec, double r) : EntrywiseNode("hadamard_power", spec), r_(r) {
    require(r_ > 0.0 && std::isfinite(r_), "hadamard_power: r must be positive");
    const bool id = spec.claims().infinitely_divisible;
    claims_.positive_definite = id;
    claims_.infinitely_divisible = id;
  }
  double apply(double c) const override {
    if (c < 0.0) throw DomainError("hadamard_power: negative entry");
    return std::pow(c, r_);
  }
  nlohmann::json params() const override { return {{"r", r_}}; }

 private:
  double r_;
};

class CoshRatioNode final : public detail::EntrywiseNode {
 public:
  CoshRatioNode(const KernelSpec& gamma, double nu) : EntrywiseNode("cosh_ratio", gamma), nu_(nu) {
    require(nu_ >= 0.0 && nu_ <= 1.0, "cosh_ratio: nu must lie in [0, 1]");
    const bool ok = gamma.claims().pseudo_variogram;
    claims_.positive_definite = ok;
    claims_.infinitely_divisible = ok;
  }
  double apply(double g) const override {
    return cosh_ratio_value(nu_, std::sqrt(nonnegative(g, "cosh_ratio")));
  }
  nlohmann::json params() const override { return {{"nu", nu_}}; }

 private:
  double nu_;
};

}  // namespace

KernelSpec infdiv_ratio(const KernelSpec& gamma, double a, double b) {
  return KernelSpec(std::make_shared<InfDivRatioNode>(gamma, a, b));
}

KernelSpec hadamard_power(const KernelSpec& spec, double r) {
  return KernelSpec(std::make_shared<HadamardPowerNode>(spec, r));
}

KernelSpec cosh_ratio(const KernelSpec& gamma, double nu) {
  return KernelSpec(std::make_shared<CoshRatioNode>(gamma, nu));
}

}  // namespace covkit
