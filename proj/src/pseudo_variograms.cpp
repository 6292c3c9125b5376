#include "covkit/pseudo_variograms.hpp"

#include <cmath>

#include "covkit/detail/common.hpp"

namespace covkit {

using detail::head;
using detail::require;
using detail::squared_distance;
using detail::tail;

namespace {

Partials constant_partials(int m, double f, double f1, double f2) {
  return {Block::Constant(m, m, f), Block::Constant(m, m, f1), Block::Constant(m, m, f2)};
}

class PowerNode final : public Node {
 public:
  PowerNode(int m, Domain domain, double alpha, double scale, double sill)
      : Node("pcv_power", m, domain), alpha_(alpha), scale_(scale), sill_(sill) {
    require(alpha_ > 0.0 && alpha_ <= 2.0, "pcv_power: alpha must lie in (0, 2]");
    require(scale_ > 0.0 && std::isfinite(scale_), "pcv_power: scale must be positive");
    require(sill_ > 0.0 && std::isfinite(sill_), "pcv_power: sill must be positive");
    claims_.conditionally_negative_definite = true;
    claims_.pseudo_variogram = true;
  }
  Block evaluate(PointView x, PointView y) const override {
    const double r2 = squared_distance(x, y) / (scale_ * scale_);
    return Block::Constant(m(), m(), r2 == 0.0 ? 0.0 : sill_ * std::pow(r2, 0.5 * alpha_));
  }
  nlohmann::json params() const override {
    return {{"alpha", alpha_}, {"scale", scale_}, {"sill", sill_}};
  }
  bool stationary() const override { return true; }
  bool differentiable(int) const override { return alpha_ == 2.0; }
  Partials partials(PointView x, PointView y, int coord) const override {
    if (alpha_ != 2.0) return Node::partials(x, y, coord);
    const double s2 = scale_ * scale_;
    const double h = x[coord] - y[coord];
    return constant_partials(m(), sill_ * squared_distance(x, y) / s2, 2.0 * sill_ * h / s2,
                             2.0 * sill_ / s2);
  }

 private:
  double alpha_, scale_, sill_;
};

class GaussianVariogramNode final : public Node {
 public:
  GaussianVariogramNode(int m, Domain domain, double scale, double sill)
      : Node("pcv_gaussian", m, domain), scale_(scale), sill_(sill) {
    require(scale_ > 0.0 && std::isfinite(scale_), "pcv_gaussian: scale must be positive");
    require(sill_ > 0.0 && std::isfinite(sill_), "pcv_gaussian: sill must be positive");
    claims_.conditionally_negative_definite = true;
    claims_.pseudo_variogram = true;
  }
  Block evaluate(PointView x, PointView y) const override {
    const double r2 = squared_distance(x, y) / (scale_ * scale_);
    return Block::Constant(m(), m(), -sill_ * std::expm1(-r2));
  }
  nlohmann::json params() const override { return {{"scale", scale_}, {"sill", sill_}}; }
  bool stationary() const override { return true; }
  bool differentiable(int) const override { return true; }
  Partials partials(PointView x, PointView y, int coord) const override {
    const double s2 = scale_ * scale_;
    const double r2 = squared_distance(x, y) / s2;
    const double e = std::exp(-r2);
    const double h = x[coord] - y[coord];
    return constant_partials(m(), -sill_ * std::expm1(-r2), sill_ * 2.0 * h / s2 * e,
                             sill_ * (2.0 / s2 - 4.0 * h * h / (s2 * s2)) * e);
  }

 private:
  double scale_, sill_;
};

nlohmann::json g_to_json(const GFunction& g) {
  nlohmann::json j{{"c0", g.c0}};
  if (g.linear.size() > 0) j["linear"] = detail::vector_to_json(g.linear);
  if (g.quadratic != 0.0) j["quadratic"] = g.quadratic;
  return j;
}

class GAndCNode final : public Node {
 public:
  GAndCNode(std::vector<GFunction> g, const KernelSpec& c, bool half_diagonal)
      : Node("pcv_g_and_c", c.m(), c.domain(), {c}), g_(std::move(g)), half_(half_diagonal) {
    if (!half_ && static_cast<int>(g_.size()) != c.m())
      throw ShapeError("pcv_g_and_c: number of g functions must equal m");
    for (const auto& gi : g_)
      if (gi.linear.size() != 0 && gi.linear.size() != c.domain().total())
        throw ShapeError("pcv_g_and_c: linear coefficient length must be d + k");
    const bool pd = c.claims().positive_definite;
    claims_.conditionally_negative_definite = pd;
    if (half_) {
      claims_.pseudo_variogram = pd;
    } else if (pd && c.stationary()) {
      bool constant = true;
      for (const auto& gi : g_) constant &= gi.is_constant();
      if (constant) {
        const Point o = detail::zeros(c.domain().total());
        const Block c0 = c.node().evaluate(o, o);
        bool match = true;
        for (int i = 0; i < c.m(); ++i)
          match &= std::abs(2.0 * g_[i].c0 - c0(i, i)) <= 1e-12 * std::max(1.0, std::abs(c0(i, i)));
        claims_.pseudo_variogram = match;
      }
    }
  }

  Block evaluate(PointView x, PointView y) const override {
    const Block c = children()[0].node().evaluate(x, y);
    const Eigen::VectorXd gx = g_values(x), gy = g_values(y);
    Block out(m(), m());
    for (int i = 0; i < m(); ++i)
      for (int j = 0; j < m(); ++j) out(i, j) = gx(i) + gy(j) - c(i, j);
    return out;
  }

  nlohmann::json params() const override {
    if (half_) return {{"g", "half_diagonal"}};
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& gi : g_) arr.push_back(g_to_json(gi));
    return {{"g", arr}};
  }

  bool stationary() const override {
    if (!children()[0].stationary()) return false;
    for (const auto& gi : g_)
      if (!gi.is_constant()) return false;
    return true;
  }

  bool differentiable(int coord) const override {
    const KernelSpec& c = children()[0];
    return c.node().differentiable(coord) && (!half_ || c.stationary());
  }

  Partials partials(PointView x, PointView y, int coord) const override {
    if (!differentiable(coord)) return Node::partials(x, y, coord);
    Partials p = children()[0].node().partials(x, y, coord);
    const Eigen::VectorXd gx = g_values(x), gy = g_values(y);
    for (int i = 0; i < m(); ++i) {
      double g1 = 0.0, g2 = 0.0;
      if (!half_) {
        const GFunction& gi = g_[i];
        if (gi.linear.size() > 0) g1 += gi.linear(coord);
        g1 += 2.0 * gi.quadratic * x[coord];
        g2 = 2.0 * gi.quadratic;
      }
      for (int j = 0; j < m(); ++j) {
        p.value(i, j) = gx(i) + gy(j) - p.value(i, j);
        p.first(i, j) = g1 - p.first(i, j);
        p.second(i, j) = g2 - p.second(i, j);
      }
    }
    return p;
  }

 private:
  Eigen::VectorXd g_values(PointView x) const {
    Eigen::VectorXd out(m());
    if (half_) {
      const Block cxx = children()[0].node().evaluate(x, x);
      for (int i = 0; i < m(); ++i) out(i) = 0.5 * cxx(i, i);
    } else {
      for (int i = 0; i < m(); ++i) out(i) = g_[i](x);
    }
    return out;
  }

  std::vector<GFunction> g_;
  bool half_;
};

class CoregionalizedNode final : public Node {
 public:
  CoregionalizedNode(const KernelSpec& gamma, Eigen::MatrixXd rho)
      : Node("coregionalized", static_cast<int>(rho.rows()), gamma.domain(), {gamma}),
        rho_(std::move(rho)) {
    if (gamma.m() != 1) throw ShapeError("coregionalized: child must be univariate");
    if (rho_.rows() != rho_.cols()) throw ShapeError("coregionalized: rho must be square");
    require(detail::is_symmetric(rho_), "coregionalized: rho must be symmetric");
    claims_.cross_variogram = gamma.claims().pseudo_variogram && detail::is_psd(rho_, 1e-12);
  }
  Block evaluate(PointView x, PointView y) const override {
    return rho_ * children()[0].node().evaluate(x, y)(0, 0);
  }
  nlohmann::json params() const override { return {{"rho", detail::matrix_to_json(rho_)}}; }
  bool differentiable(int coord) const override {
    return children()[0].node().differentiable(coord);
  }
  Partials partials(PointView x, PointView y, int coord) const override {
    const Partials p = children()[0].node().partials(x, y, coord);
    return {rho_ * p.value(0, 0), rho_ * p.first(0, 0), rho_ * p.second(0, 0)};
  }

 private:
  Eigen::MatrixXd rho_;
};

class CrossVariogramNode final : public Node {
 public:
  explicit CrossVariogramNode(const KernelSpec& tg)
      : Node("pcv_cross_variogram", tg.m(), tg.domain(), {tg}) {
    claims_.conditionally_negative_definite = tg.claims().cross_variogram;
    claims_.pseudo_variogram = tg.claims().cross_variogram;
  }
  Block evaluate(PointView x, PointView y) const override {
    const Node& tg = children()[0].node();
    const Point o = detail::zeros(domain().total());
    const Block a = tg.evaluate(x, o), b = tg.evaluate(y, o), t = tg.evaluate(x, y);
    Block out(m(), m());
    for (int i = 0; i < m(); ++i)
      for (int j = 0; j < m(); ++j) out(i, j) = a(i, i) + b(j, j) - (a(i, j) + b(i, j) - t(i, j));
    return out;
  }
  bool stationary() const override { return false; }
};

class OestingNode final : public Node {
 public:
  OestingNode(const KernelSpec& gamma0, const KernelSpec& c)
      : Node("pcv_oesting", c.m(), c.domain(), {gamma0, c}) {
    if (gamma0.m() != 1) throw ShapeError("pcv_oesting: gamma0 must be univariate");
    if (!(gamma0.domain() == c.domain())) throw ShapeError("pcv_oesting: domain mismatch");
    if (!c.stationary()) throw SpecError("pcv_oesting: C must be stationary");
    const Point o = detail::zeros(c.domain().total());
    c0_ = c.node().evaluate(o, o).diagonal();
    const bool ok = gamma0.claims().pseudo_variogram && c.claims().positive_definite;
    claims_.conditionally_negative_definite = ok;
    claims_.pseudo_variogram = ok;
  }
  Block evaluate(PointView x, PointView y) const override {
    const double g0 = children()[0].node().evaluate(x, y)(0, 0);
    const Block c = children()[1].node().evaluate(x, y);
    Block out(m(), m());
    for (int i = 0; i < m(); ++i)
      for (int j = 0; j < m(); ++j) out(i, j) = g0 + 0.5 * (c0_(i) + c0_(j)) - c(i, j);
    return out;
  }
  bool differentiable(int coord) const override {
    return children()[0].node().differentiable(coord) &&
           children()[1].node().differentiable(coord);
  }
  Partials partials(PointView x, PointView y, int coord) const override {
    const Partials g = children()[0].node().partials(x, y, coord);
    Partials c = children()[1].node().partials(x, y, coord);
    for (int i = 0; i < m(); ++i)
      for (int j = 0; j < m(); ++j) {
        c.value(i, j) = g.value(0, 0) + 0.5 * (c0_(i) + c0_(j)) - c.value(i, j);
        c.first(i, j) = g.first(0, 0) - c.first(i, j);
        c.second(i, j) = g.second(0, 0) - c.second(i, j);
      }
    return c;
  }

 private:
  Eigen::VectorXd c0_;
};

class DelayNode final : public Node {
 public:
  DelayNode(const KernelSpec& gamma0, std::vector<Eigen::VectorXd> delays)
      : Node("pcv_delay", static_cast<int>(delays.size()), gamma0.domain(), {gamma0}),
        delays_(std::move(delays)) {
    if (gamma0.m() != 1) throw ShapeError("pcv_delay: gamma0 must be univariate");
    for (const auto& t : delays_)
      if (t.size() != domain().total()) throw ShapeError("pcv_delay: delay length must be d + k");
    claims_.conditionally_negative_definite = gamma0.claims().pseudo_variogram;
    claims_.pseudo_variogram = gamma0.claims().pseudo_variogram;
  }
  Block evaluate(PointView x, PointView y) const override {
    Block out(m(), m());
    for (int i = 0; i < m(); ++i) {
      const Point xi = detail::shifted(x, delays_[i], -1.0);
      for (int j = 0; j < m(); ++j) {
        const Point yj = detail::shifted(y, delays_[j], -1.0);
        out(i, j) = children()[0].node().evaluate(xi, yj)(0, 0);
      }
    }
    return out;
  }
  nlohmann::json params() const override {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& t : delays_) arr.push_back(detail::vector_to_json(t));
    return {{"delays", arr}};
  }
  bool differentiable(int coord) const override {
    return children()[0].node().differentiable(coord);
  }
  Partials partials(PointView x, PointView y, int coord) const override {
    Partials out{Block(m(), m()), Block(m(), m()), Block(m(), m())};
    for (int i = 0; i < m(); ++i) {
      const Point xi = detail::shifted(x, delays_[i], -1.0);
      for (int j = 0; j < m(); ++j) {
        const Point yj = detail::shifted(y, delays_[j], -1.0);
        const Partials p = children()[0].node().partials(xi, yj, coord);
        out.value(i, j) = p.value(0, 0);
        out.first(i, j) = p.first(0, 0);
        out.second(i, j) = p.second(0, 0);
      }
    }
    return out;
  }

 private:
  std::vector<Eigen::VectorXd> delays_;
};

class BernsteinNode final : public detail::EntrywiseNode {
 public:
  BernsteinNode(const KernelSpec& child, BernsteinTransform t)
      : EntrywiseNode("bernstein", child), t_(t) {
    require(std::isfinite(t_.param) && t_.param > 0.0, "bernstein: parameter must be positive");
    if (t_.kind == BernsteinKind::power)
      require(t_.param <= 1.0, "bernstein: power exponent must lie in (0, 1]");
    claims_.conditionally_negative_definite = child.claims().conditionally_negative_definite;
    claims_.pseudo_variogram = child.claims().pseudo_variogram;
  }
  double apply(double g) const override { return t_(g); }
  bool smooth() const override { return t_.smooth(); }
  void apply_with_derivatives(double g, double& f0, double& f1, double& f2) const override {
    t_.derivatives(g, f0, f1, f2);
  }
  nlohmann::json params() const override {
    return {{"transform", std::string(to_string(t_.kind))}, {"param", t_.param}};
  }

 private:
  BernsteinTransform t_;
};

class NestedNode final : public detail::SpaceTimePairNode {
 public:
  NestedNode(const KernelSpec& s, const KernelSpec& t)
      : SpaceTimePairNode("nested_spacetime", s, t) {
    claims_.conditionally_negative_definite = s.claims().conditionally_negative_definite &&
                                              t.claims().conditionally_negative_definite;
    claims_.pseudo_variogram = both_pseudo();
  }
  double combine(int, int, double s, double t) const override { return s + t; }
  bool differentiable(int coord) const override {
    const int d = domain().space;
    return coord < d ? spatial().node().differentiable(coord)
                     : temporal().node().differentiable(coord - d);
  }
  Partials partials(PointView x, PointView y, int coord) const override {
    const int d = domain().space;
    if (coord < d) {
      Partials p = spatial().node().partials(head(x, d), head(y, d), coord);
      p.value += temporal().node().evaluate(tail(x, d), tail(y, d));
      return p;
    }
    Partials p = temporal().node().partials(tail(x, d), tail(y, d), coord - d);
    p.value += spatial().node().evaluate(head(x, d), head(y, d));
    return p;
  }
};

class TransportNode final : public Node {
 public:
  TransportNode(const KernelSpec& spatial, Eigen::VectorXd v)
      : Node("transport", spatial.m(), Domain{spatial.domain().total(), 1}, {spatial}),
        v_(std::move(v)) {
    if (v_.size() != spatial.domain().total())
      throw ShapeError("transport: velocity length must equal the spatial dimension");
    claims_ = spatial.claims();
    claims_.cross_variogram = false;
    claims_.infinitely_divisible = false;
  }
  Block evaluate(PointView x, PointView y) const override {
    const Point xs = moved(x), ys = moved(y);
    return children()[0].node().evaluate(xs, ys);
  }
  nlohmann::json params() const override { return {{"velocity", detail::vector_to_json(v_)}}; }
  bool differentiable(int coord) const override {
    const int d = domain().space;
    if (coord < d) return children()[0].node().differentiable(coord);
    const int axis = single_axis();
    return axis >= -1 && (axis == -1 || children()[0].node().differentiable(axis));
  }
  Partials partials(PointView x, PointView y, int coord) const override {
    if (!differentiable(coord)) return Node::partials(x, y, coord);
    const Point xs = moved(x), ys = moved(y);
    const int d = domain().space;
    if (coord < d) return children()[0].node().partials(xs, ys, coord);
    const int axis = single_axis();
    if (axis == -1) {
      const Block z = Block::Zero(m(), m());
      return {children()[0].node().evaluate(xs, ys), z, z};
    }
    Partials p = children()[0].node().partials(xs, ys, axis);
    const double v = v_(axis);
    p.first *= -v;
    p.second *= v * v;
    return p;
  }

 private:
  Point moved(PointView x) const {
    const int d = domain().space;
    Point out(x.begin(), x.begin() + d);
    for (int c = 0; c < d; ++c) out[c] -= v_(c) * x[d];
    return out;
  }
  // -1: zero velocity, -2: more than one non-zero component.
  int single_axis() const {
    int axis = -1;
    for (int c = 0; c < v_.size(); ++c)
      if (v_(c) != 0.0) {
        if (axis != -1) return -2;
        axis = c;
      }
    return axis;
  }

  Eigen::VectorXd v_;
};

}  // namespace

double GFunction::operator()(PointView x) const {
  double v = c0;
  double r2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (linear.size() > 0) v += linear(static_cast<Eigen::Index>(i)) * x[i];
    r2 += x[i] * x[i];
  }
  return v + quadratic * r2;
}

bool GFunction::is_constant() const {
  return quadratic == 0.0 && (linear.size() == 0 || linear.isZero(0.0));
}

std::string_view to_string(BernsteinKind kind) {
  switch (kind) {
    case BernsteinKind::log1p: return "log1p";
    case BernsteinKind::power: return "power";
    case BernsteinKind::scale: return "scale";
    case BernsteinKind::rational: return "rational";
  }
  return "log1p";
}

BernsteinKind bernstein_kind_from_string(std::string_view name) {
  if (name == "log1p") return BernsteinKind::log1p;
  if (name == "power") return BernsteinKind::power;
  if (name == "scale") return BernsteinKind::scale;
  if (name == "rational") return BernsteinKind::rational;
  throw SpecError("bernstein: unknown transform '" + std::string(name) + "'");
}

namespace {

double clamp_nonnegative(double t) {
  if (t < 0.0) {
    if (t > -1e-12) return 0.0;
    throw DomainError("Bernstein transform applied to a negative value");
  }
  return t;
}

}  // namespace

double BernsteinTransform::operator()(double t) const {
  if (kind == BernsteinKind::scale) return param * t;
  t = clamp_nonnegative(t);
  switch (kind) {
    case BernsteinKind::log1p: return std::log1p(t);
    case BernsteinKind::power: return t == 0.0 ? 0.0 : std::pow(t, param);
    case BernsteinKind::rational: return t / (param + t);
    case BernsteinKind::scale: break;
  }
  return param * t;
}

void BernsteinTransform::derivatives(double t, double& f0, double& f1, double& f2) const {
  if (kind == BernsteinKind::scale) {
    f0 = param * t;
    f1 = param;
    f2 = 0.0;
    return;
  }
  t = clamp_nonnegative(t);
  switch (kind) {
    case BernsteinKind::log1p:
      f0 = std::log1p(t);
      f1 = 1.0 / (1.0 + t);
      f2 = -f1 * f1;
      return;
    case BernsteinKind::power:
      if (param != 1.0) throw SpecError("bernstein: power transform is not smooth at zero");
      f0 = t;
      f1 = 1.0;
      f2 = 0.0;
      return;
    case BernsteinKind::rational: {
      const double s = param + t;
      f0 = t / s;
      f1 = param / (s * s);
      f2 = -2.0 * param / (s * s * s);
      return;
    }
    case BernsteinKind::scale: break;
  }
}

KernelSpec pcv_power(int m, Domain domain, double alpha, double scale, double sill) {
  return KernelSpec(std::make_shared<PowerNode>(m, domain, alpha, scale, sill));
}

KernelSpec pcv_gaussian(int m, Domain domain, double scale, double sill) {
  return KernelSpec(std::make_shared<GaussianVariogramNode>(m, domain, scale, sill));
}

KernelSpec pcv_g_and_c(std::vector<GFunction> g, const KernelSpec& c) {
  return KernelSpec(std::make_shared<GAndCNode>(std::move(g), c, false));
}

KernelSpec pcv_g_and_c_half_diagonal(const KernelSpec& c) {
  return KernelSpec(std::make_shared<GAndCNode>(std::vector<GFunction>{}, c, true));
}

KernelSpec coregionalized(const KernelSpec& gamma, const Eigen::MatrixXd& rho) {
  return KernelSpec(std::make_shared<CoregionalizedNode>(gamma, rho));
}

KernelSpec pcv_cross_variogram(const KernelSpec& tilde_gamma) {
  return KernelSpec(std::make_shared<CrossVariogramNode>(tilde_gamma));
}

KernelSpec pcv_oesting(const KernelSpec& gamma0, const KernelSpec& c) {
  return KernelSpec(std::make_shared<OestingNode>(gamma0, c));
}

KernelSpec pcv_delay(const KernelSpec& gamma0, const std::vector<Eigen::VectorXd>& delays) {
  if (delays.empty()) throw ShapeError("pcv_delay: needs at least one delay");
  return KernelSpec(std::make_shared<DelayNode>(gamma0, delays));
}

KernelSpec pcv_bernstein(const KernelSpec& model, BernsteinTransform t) {
  return KernelSpec(std::make_shared<BernsteinNode>(model, t));
}

KernelSpec pcv_nested_spacetime(const KernelSpec& spatial, const KernelSpec& temporal) {
  if (spatial.domain().time != 0 || temporal.domain().time != 0)
    throw ShapeError("nested_spacetime: children must be purely spatial");
  return KernelSpec(std::make_shared<NestedNode>(spatial, temporal));
}

KernelSpec pcv_transport(const KernelSpec& spatial, const Eigen::VectorXd& velocity) {
  if (spatial.domain().time != 0) throw ShapeError("transport: child must be purely spatial");
  return KernelSpec(std::make_shared<TransportNode>(spatial, velocity));
}

}  // namespace covkit
