#include "covkit/mixtures.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include <boost/math/special_functions/legendre.hpp>

#include "covkit/detail/common.hpp"
#include "covkit/linalg_special.hpp"

namespace covkit {

using detail::require;

QuadratureRule gauss_legendre(int n, double a, double b) {
  if (n < 1) throw SpecError("gauss_legendre: n must be >= 1");
  if (!(b > a)) throw SpecError("gauss_legendre: empty interval");
  // Boost returns the non-negative roots only.
  const std::vector<double> roots = boost::math::legendre_p_zeros<double>(n);
  QuadratureRule rule;
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  auto add = [&](double x) {
    const double dp = boost::math::legendre_p_prime(n, x);
    rule.nodes.push_back(mid + half * x);
    rule.weights.push_back(half * 2.0 / ((1.0 - x * x) * dp * dp));
  };
  for (double r : roots) {
    add(r);
    if (r != 0.0) add(-r);
  }
  return rule;
}

MixtureParams MixtureParams::explicit_nodes(std::vector<MixtureNode2D> nodes) {
  MixtureParams p;
  p.nodes = std::move(nodes);
  return p;
}

MixtureParams MixtureParams::density_on_box(DensityFamily family, double v_lo, double v_hi,
                                            double w_lo, double w_hi, int order,
                                            Eigen::MatrixXd constant_density) {
  MixtureParams p;
  p.family = family;
  p.v_lo = v_lo;
  p.v_hi = v_hi;
  p.w_lo = w_lo;
  p.w_hi = w_hi;
  p.order = order;
  p.constant_density = std::move(constant_density);
  return p;
}

std::string_view to_string(DensityFamily family) {
  return family == DensityFamily::hessian_toy ? "hessian_toy" : "constant";
}

DensityFamily density_family_from_string(std::string_view name) {
  if (name == "hessian_toy") return DensityFamily::hessian_toy;
  if (name == "constant") return DensityFamily::constant;
  throw SpecError("unknown density family '" + std::string(name) + "'");
}

Eigen::Matrix2d hessian_toy_density(double v, double w) {
  Eigen::Matrix2d f;
  f << 2.0 / w, -2.0 * v / (w * w), -2.0 * v / (w * w), 2.0 * v * v / (w * w * w);
  return f;
}

std::vector<MixtureNode2D> MixtureParams::resolve(int m, int order_override) const {
  if (!family) return nodes;
  const int n = order_override > 0 ? order_override : order;
  require(v_lo >= 0.0 && w_lo >= 0.0, "mixture: box must lie in [0, inf)^2");
  const QuadratureRule rv = gauss_legendre(n, v_lo, v_hi), rw = gauss_legendre(n, w_lo, w_hi);
  if (*family == DensityFamily::hessian_toy && m != 2)
    throw ShapeError("mixture: hessian_toy density needs m = 2");
  if (*family == DensityFamily::constant &&
      (constant_density.rows() != m || constant_density.cols() != m))
    throw ShapeError("mixture: constant density must be m x m");
  std::vector<MixtureNode2D> out;
  out.reserve(rv.nodes.size() * rw.nodes.size());
  for (std::size_t a = 0; a < rv.nodes.size(); ++a)
    for (std::size_t b = 0; b < rw.nodes.size(); ++b) {
      MixtureNode2D node;
      node.v = rv.nodes[a];
      node.w = rw.nodes[b];
      node.weight = rv.weights[a] * rw.weights[b];
      node.density = *family == DensityFamily::hessian_toy
                         ? Eigen::MatrixXd(hessian_toy_density(node.v, node.w))
                         : constant_density;
      out.push_back(std::move(node));
    }
  return out;
}

namespace {

double nonnegative_argument(double t, const char* what) {
  if (t < 0.0) {
    if (t > -1e-12) return 0.0;
    throw DomainError(std::string(what) + ": negative variogram value " + std::to_string(t));
  }
  return t;
}

bool cnd_pair(const KernelSpec& gs, const KernelSpec& gt) {
  return gs.claims().conditionally_negative_definite &&
         gt.claims().conditionally_negative_definite;
}

void require_split_children(const KernelSpec& gs, const KernelSpec& gt, const char* op) {
  if (gs.domain().time != 0 || gt.domain().time != 0)
    throw ShapeError(std::string(op) + ": spatial and temporal children must be purely spatial");
  if (gs.m() != gt.m()) throw ShapeError(std::string(op) + ": m mismatch");
}

nlohmann::json mixture_to_json(const MixtureParams& p) {
  if (p.family) {
    nlohmann::json j{{"family", std::string(to_string(*p.family))},
                     {"v_range", {p.v_lo, p.v_hi}},
                     {"w_range", {p.w_lo, p.w_hi}},
                     {"order", p.order}};
    if (*p.family == DensityFamily::constant)
      j["density"] = detail::matrix_to_json(p.constant_density);
    return j;
  }
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& n : p.nodes)
    arr.push_back({{"v", n.v}, {"w", n.w}, {"weight", n.weight},
                   {"density", detail::matrix_to_json(n.density)}});
  return {{"nodes", arr}};
}

class Laplace2dNode final : public detail::SpaceTimePairNode {
 public:
  Laplace2dNode(const KernelSpec& gs, const KernelSpec& gt, MixtureParams mix)
      : SpaceTimePairNode("laplace2d_mixture", gs, gt), mix_(std::move(mix)) {
    nodes_ = mix_.resolve(m());
    if (nodes_.empty()) throw SpecError("laplace2d_mixture: no mixture nodes");
    bool weights_ok = true;
    for (const auto& n : nodes_) {
      if (n.density.rows() != m() || n.density.cols() != m())
        throw ShapeError("laplace2d_mixture: density must be m x m");
      require(n.v >= 0.0 && n.w >= 0.0 && std::isfinite(n.weight),
              "laplace2d_mixture: nodes must lie in [0, inf)^2");
      if (!detail::is_symmetric(n.density) || !detail::is_psd(n.density, 1e-10)) {
        std::ostringstream os;
        os << "laplace2d_mixture: density matrix is not symmetric PSD at node (v=" << n.v
           << ", w=" << n.w << ")";
        throw SpecError(os.str());
      }
      weights_ok &= n.weight >= 0.0;
    }
    claims_.positive_definite = weights_ok && cnd_pair(gs, gt);
  }

  double combine(int i, int j, double s, double t) const override {
    return sum(nodes_, i, j, s, t);
  }
  nlohmann::json params() const override { return mixture_to_json(mix_); }

  double error_estimate(PointView x, PointView y) const {
    if (!mix_.family) return 0.0;
    const auto fine = mix_.resolve(m(), 2 * mix_.order);
    const int d = domain().space;
    const Block s = spatial().node().evaluate(detail::head(x, d), detail::head(y, d));
    const Block t = temporal().node().evaluate(detail::tail(x, d), detail::tail(y, d));
    double err = 0.0;
    for (int i = 0; i < m(); ++i)
      for (int j = 0; j < m(); ++j)
        err = std::max(err, std::abs(sum(nodes_, i, j, s(i, j), t(i, j)) -
                                     sum(fine, i, j, s(i, j), t(i, j))));
    return err;
  }

 private:
  static double sum(const std::vector<MixtureNode2D>& nodes, int i, int j, double s, double t) {
    double acc = 0.0;
    for (const auto& n : nodes) acc += n.weight * n.density(i, j) * std::exp(-n.v * s - n.w * t);
    return acc;
  }

  MixtureParams mix_;
  std::vector<MixtureNode2D> nodes_;
};

// P_p(x) = int_1^2 v^p exp(-v x) dv, p = 0, 1, 2.
double toy_p(int p, double x) {
  if (std::abs(x) < 1.0) {
    double sum = 0.0, coef = 1.0;  // coef = (-x)^k / k!
    for (int k = 0; k < 80; ++k) {
      const int e = p + k + 1;
      const double term = coef * (std::ldexp(1.0, e) - 1.0) / e;
      sum += term;
      if (std::abs(term) < 1e-18 * std::abs(sum)) break;
      coef *= -x / (k + 1);
    }
    return sum;
  }
  double prev = (std::exp(-x) - std::exp(-2.0 * x)) / x;
  for (int q = 1; q <= p; ++q)
    prev = (std::exp(-x) - std::ldexp(1.0, q) * std::exp(-2.0 * x)) / x + q / x * prev;
  return prev;
}

// Q_q(y) = int_1^2 w^(-q) exp(-w y) dw, q = 1, 2, 3.
double toy_q(int q, double y) {
  if (std::abs(y) < 1.0) {
    double sum = 0.0, coef = 1.0;
    for (int k = 0; k < 80; ++k) {
      const int e = k - q + 1;
      const double integral = e == 0 ? std::log(2.0) : (std::ldexp(1.0, e) - 1.0) / e;
      const double term = coef * integral;
      sum += term;
      if (k > q && std::abs(term) < 1e-18 * std::abs(sum)) break;
      coef *= -y / (k + 1);
    }
    return sum;
  }
  double prev = exp_integral_ei(-2.0 * y) - exp_integral_ei(-y);
  for (int r = 2; r <= q; ++r)
    prev = (std::exp(-y) - std::ldexp(1.0, 1 - r) * std::exp(-2.0 * y)) / (r - 1) -
           y / (r - 1) * prev;
  return prev;
}

class ToyEiNode final : public detail::SpaceTimePairNode {
 public:
  ToyEiNode(const KernelSpec& gs, const KernelSpec& gt)
      : SpaceTimePairNode("toy_ei", gs, gt) {
    if (m() != 2) throw ShapeError("toy_ei: the toy model is bivariate (m = 2)");
    claims_.positive_definite = cnd_pair(gs, gt);
  }
  double combine(int i, int j, double s, double t) const override {
    return toy_ei_laplace(i, j, s, t);
  }
};

class TripleLaplaceNode final : public detail::SpaceTimePairNode {
 public:
  TripleLaplaceNode(const KernelSpec& gs, const KernelSpec& gt, TripleLaplace l)
      : SpaceTimePairNode("triple_laplace", gs, gt), l_(l) {
    l_.l0.validate();
    l_.l1.validate();
    l_.l2.validate();
    claims_.positive_definite = cnd_pair(gs, gt);
  }
  double combine(int, int, double s, double t) const override {
    return l_(nonnegative_argument(s, "triple_laplace"), nonnegative_argument(t, "triple_laplace"));
  }
  nlohmann::json params() const override { return l_.to_json(); }

 private:
  TripleLaplace l_;
};

class FonsecaNode final : public detail::SpaceTimePairNode {
 public:
  FonsecaNode(const KernelSpec& gs, const KernelSpec& gt, FonsecaParams p)
      : SpaceTimePairNode("fonseca_steel", gs, gt), p_(p) {
    for (double v : {p_.a0, p_.a1, p_.a2, p_.lambda0, p_.lambda1, p_.lambda2, p_.delta})
      require(v > 0.0 && std::isfinite(v), "fonseca_steel: all parameters must be positive");
    k_ref_ = bessel_k(p_.lambda1, 2.0 * std::sqrt(p_.a1 * p_.delta));
    require(k_ref_ > 0.0 && std::isfinite(k_ref_),
            "fonseca_steel: K_lambda1(2 sqrt(a1 delta)) is not representable");
    claims_.positive_definite = cnd_pair(gs, gt);
  }
  double combine(int, int, double s, double t) const override {
    s = nonnegative_argument(s, "fonseca_steel");
    t = nonnegative_argument(t, "fonseca_steel");
    return std::pow(1.0 + (s + t) / p_.a0, -p_.lambda0) *
           std::pow(1.0 + s / p_.a1, -p_.lambda1 / 2.0) * std::pow(1.0 + t / p_.a2, -p_.lambda2) *
           bessel_k(p_.lambda1, 2.0 * std::sqrt((p_.a1 + s) * p_.delta)) / k_ref_;
  }
  nlohmann::json params() const override {
    return {{"a0", p_.a0},           {"a1", p_.a1},           {"a2", p_.a2},
            {"lambda0", p_.lambda0}, {"lambda1", p_.lambda1}, {"lambda2", p_.lambda2},
            {"delta", p_.delta}};
  }

 private:
  FonsecaParams p_;
  double k_ref_ = 1.0;
};

class MaternMixtureNode final : public detail::SpaceTimePairNode {
 public:
  MaternMixtureNode(const KernelSpec& gs, const KernelSpec& gt, Eigen::VectorXd nu)
      : SpaceTimePairNode("matern_mixture", gs, gt), nu_(std::move(nu)) {
    if (nu_.size() != m()) throw ShapeError("matern_mixture: need one smoothness per variable");
    for (Eigen::Index i = 0; i < nu_.size(); ++i)
      require(nu_(i) > 0.0 && std::isfinite(nu_(i)), "matern_mixture: smoothness must be positive");
    claims_.positive_definite = cnd_pair(gs, gt);
  }
  double combine(int i, int j, double s, double t) const override {
    const double nu = 0.5 * (nu_(i) + nu_(j));
    s = nonnegative_argument(s, "matern_mixture");
    t = nonnegative_argument(t, "matern_mixture");
    const double tp = 1.0 + t;
    const double limit = std::exp((nu - 1.0) * std::log(2.0) + log_gamma(nu) - nu * std::log(tp));
    if (s == 0.0) return limit;
    const BesselKResult k = bessel_k_checked(nu, std::sqrt(s * tp));
    if (k.overflow) return limit;
    return std::pow(s / tp, 0.5 * nu) * k.value;
  }
  nlohmann::json params() const override { return {{"nu", detail::vector_to_json(nu_)}}; }

 private:
  Eigen::VectorXd nu_;
};

class TransportMixtureNode final : public Node {
 public:
  TransportMixtureNode(const KernelSpec& g1, const KernelSpec& g2, TripleLaplace l,
                       VelocitySampler sampler, int n_mc, std::uint64_t seed)
      : Node("transport_mixture", g1.m(), Domain{g1.domain().total() + g2.domain().total(), 1},
             {g1, g2}),
        l_(l),
        sampler_(std::move(sampler)),
        n_mc_(n_mc),
        seed_(seed) {
    if (g1.m() != g2.m()) throw ShapeError("transport_mixture: m mismatch");
    if (g1.domain().time != 0 || g2.domain().time != 0)
      throw ShapeError("transport_mixture: children must be purely spatial");
    require(n_mc_ >= 1, "transport_mixture: n_mc must be >= 1");
    if (sampler_.mean.size() != domain().space)
      throw ShapeError("transport_mixture: velocity length must be d1 + d2");
    l_.l0.validate();
    l_.l1.validate();
    l_.l2.validate();
    draws_ = sampler_.draw(n_mc_, seed_);
    claims_.positive_definite = g1.claims().conditionally_negative_definite &&
                                g2.claims().conditionally_negative_definite;
  }

  Block evaluate(PointView x, PointView y) const override {
    const int d1 = children()[0].domain().total();
    const int d = domain().space;
    const double tx = x[d], ty = y[d];
    Block acc = Block::Zero(m(), m());
    Point x1(d1), y1(d1), x2(d - d1), y2(d - d1);
    for (const auto& v : draws_) {
      for (int c = 0; c < d; ++c) {
        const double xc = x[c] - v(c) * tx, yc = y[c] - v(c) * ty;
        if (c < d1) {
          x1[c] = xc;
          y1[c] = yc;
        } else {
          x2[c - d1] = xc;
          y2[c - d1] = yc;
        }
      }
      const Block a = children()[0].node().evaluate(x1, y1);
      const Block b = children()[1].node().evaluate(x2, y2);
      for (int i = 0; i < m(); ++i)
        for (int j = 0; j < m(); ++j)
          acc(i, j) += l_(nonnegative_argument(a(i, j), "transport_mixture"),
                          nonnegative_argument(b(i, j), "transport_mixture"));
    }
    return acc / static_cast<double>(draws_.size());
  }

  nlohmann::json params() const override {
    return {{"d1", children()[0].domain().total()},
            {"laplace", l_.to_json()},
            {"velocity", sampler_.to_json()},
            {"n_mc", n_mc_},
            {"seed", seed_}};
  }

 private:
  TripleLaplace l_;
  VelocitySampler sampler_;
  int n_mc_;
  std::uint64_t seed_;
  std::vector<Eigen::VectorXd> draws_;
};

}  // namespace

double toy_ei_laplace(int i, int j, double x, double y) {
  if (i < 0 || i > 1 || j < 0 || j > 1) throw ShapeError("toy_ei: index out of range");
  if (i != j) return -2.0 * toy_p(1, x) * toy_q(2, y);
  if (i == 0) return 2.0 * toy_p(0, x) * toy_q(1, y);
  return 2.0 * toy_p(2, x) * toy_q(3, y);
}

void LaplaceTransform1D::validate() const {
  switch (kind) {
    case LaplaceKind::point_mass:
      require(p1 >= 0.0 && std::isfinite(p1), "point_mass: location must be >= 0");
      return;
    case LaplaceKind::gamma:
      require(p1 > 0.0 && p2 > 0.0 && std::isfinite(p1) && std::isfinite(p2),
              "gamma: shape and rate must be positive");
      return;
    case LaplaceKind::gig:
      require(std::isfinite(p1) && p2 > 0.0 && p3 > 0.0 && std::isfinite(p2) && std::isfinite(p3),
              "gig: a and delta must be positive");
      return;
  }
}

double LaplaceTransform1D::operator()(double t) const {
  t = nonnegative_argument(t, "Laplace transform");
  switch (kind) {
    case LaplaceKind::point_mass: return std::exp(-p1 * t);
    case LaplaceKind::gamma: return std::pow(1.0 + t / p2, -p1);
    case LaplaceKind::gig: {
      const double k0 = bessel_k(p1, 2.0 * std::sqrt(p2 * p3));
      return std::pow(p2 / (p2 + t), 0.5 * p1) * bessel_k(p1, 2.0 * std::sqrt((p2 + t) * p3)) / k0;
    }
  }
  return 1.0;
}

nlohmann::json LaplaceTransform1D::to_json() const {
  switch (kind) {
    case LaplaceKind::point_mass: return {{"kind", "point_mass"}, {"at", p1}};
    case LaplaceKind::gamma: return {{"kind", "gamma"}, {"shape", p1}, {"rate", p2}};
    case LaplaceKind::gig: return {{"kind", "gig"}, {"lambda", p1}, {"a", p2}, {"delta", p3}};
  }
  return {};
}

namespace {

double number(const nlohmann::json& j, const char* key, std::optional<double> fallback = {}) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    throw SpecError(std::string("missing parameter '") + key + "'");
  }
  if (!j.at(key).is_number()) throw SpecError(std::string("parameter '") + key + "' must be a number");
  return j.at(key).get<double>();
}

}  // namespace

LaplaceTransform1D LaplaceTransform1D::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
    throw SpecError("Laplace transform needs a 'kind'");
  const std::string kind = j["kind"];
  LaplaceTransform1D out;
  if (kind == "point_mass") out = point_mass(number(j, "at", 0.0));
  else if (kind == "gamma") out = gamma(number(j, "shape"), number(j, "rate"));
  else if (kind == "exponential") out = exponential(number(j, "rate"));
  else if (kind == "gig") out = gig(number(j, "lambda"), number(j, "a"), number(j, "delta"));
  else throw SpecError("unknown Laplace transform kind '" + kind + "'");
  out.validate();
  return out;
}

nlohmann::json TripleLaplace::to_json() const {
  return {{"L0", l0.to_json()}, {"L1", l1.to_json()}, {"L2", l2.to_json()}};
}

TripleLaplace TripleLaplace::from_json(const nlohmann::json& j) {
  TripleLaplace t;
  const nlohmann::json unit = {{"kind", "point_mass"}, {"at", 0.0}};
  t.l0 = LaplaceTransform1D::from_json(j.value("L0", unit));
  t.l1 = LaplaceTransform1D::from_json(j.value("L1", unit));
  t.l2 = LaplaceTransform1D::from_json(j.value("L2", unit));
  return t;
}

std::vector<Eigen::VectorXd> VelocitySampler::draw(int n, std::uint64_t seed) const {
  std::vector<Eigen::VectorXd> out(static_cast<std::size_t>(n), mean);
  if (kind == Kind::fixed) return out;
  require(sd >= 0.0 && std::isfinite(sd), "velocity sampler: sd must be >= 0");
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto& v : out)
    for (Eigen::Index c = 0; c < v.size(); ++c) v(c) += sd * normal(gen);
  return out;
}

nlohmann::json VelocitySampler::to_json() const {
  nlohmann::json j{{"kind", kind == Kind::fixed ? "fixed" : "normal"},
                   {"mean", detail::vector_to_json(mean)}};
  if (kind == Kind::normal) j["sd"] = sd;
  return j;
}

VelocitySampler VelocitySampler::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw SpecError("velocity sampler must be an object");
  VelocitySampler s;
  const std::string kind = j.value("kind", std::string("fixed"));
  if (kind == "fixed") s.kind = Kind::fixed;
  else if (kind == "normal") s.kind = Kind::normal;
  else throw SpecError("unknown velocity sampler '" + kind + "'");
  if (!j.contains("mean")) throw SpecError("velocity sampler needs 'mean'");
  s.mean = detail::vector_from_json(j["mean"], "velocity mean");
  s.sd = number(j, "sd", 1.0);
  return s;
}

Mixture1D Mixture1D::single(double t, double weight) {
  Mixture1D mix;
  mix.nodes.push_back({t, weight, {}});
  return mix;
}

void Mixture1D::validate(int m) const {
  require(!nodes.empty(), "mixture: needs at least one node");
  for (const auto& n : nodes) {
    require(n.t > 0.0 && std::isfinite(n.t), "mixture: nodes must be positive");
    require(n.weight >= 0.0 && std::isfinite(n.weight), "mixture: weights must be >= 0");
    if (n.density.size() == 0) continue;
    if (n.density.rows() != m || n.density.cols() != m)
      throw ShapeError("mixture: density must be m x m");
    if (!detail::is_symmetric(n.density) || !detail::is_psd(n.density, 1e-10)) {
      std::ostringstream os;
      os << "mixture: density matrix is not symmetric PSD at node t=" << n.t;
      throw SpecError(os.str());
    }
  }
}

double Mixture1D::density(std::size_t node, int i, int j) const {
  const auto& d = nodes[node].density;
  return d.size() == 0 ? 1.0 : d(i, j);
}

nlohmann::json Mixture1D::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& n : nodes) {
    nlohmann::json j{{"t", n.t}, {"weight", n.weight}};
    if (n.density.size() > 0) j["density"] = detail::matrix_to_json(n.density);
    arr.push_back(std::move(j));
  }
  return {{"nodes", arr}};
}

Mixture1D Mixture1D::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("nodes") || !j["nodes"].is_array())
    throw SpecError("mixture needs a 'nodes' array");
  Mixture1D mix;
  for (const auto& n : j["nodes"]) {
    MixtureNode1D node;
    node.t = number(n, "t");
    node.weight = number(n, "weight", 1.0);
    if (n.contains("density")) node.density = detail::matrix_from_json(n["density"], "density");
    mix.nodes.push_back(std::move(node));
  }
  return mix;
}

KernelSpec laplace2d_mixture(const KernelSpec& gs, const KernelSpec& gt, const MixtureParams& mix) {
  require_split_children(gs, gt, "laplace2d_mixture");
  return KernelSpec(std::make_shared<Laplace2dNode>(gs, gt, mix));
}

double laplace2d_error_estimate(const KernelSpec& mixture, PointView x, PointView y) {
  const auto* node = dynamic_cast<const Laplace2dNode*>(&mixture.node());
  if (!node) throw SpecError("laplace2d_error_estimate: not a laplace2d_mixture");
  return node->error_estimate(x, y);
}

KernelSpec toy_ei_model(const KernelSpec& gs, const KernelSpec& gt) {
  require_split_children(gs, gt, "toy_ei");
  return KernelSpec(std::make_shared<ToyEiNode>(gs, gt));
}

KernelSpec triple_laplace(const KernelSpec& gs, const KernelSpec& gt, const TripleLaplace& l) {
  require_split_children(gs, gt, "triple_laplace");
  return KernelSpec(std::make_shared<TripleLaplaceNode>(gs, gt, l));
}

KernelSpec fonseca_steel(const KernelSpec& gs, const KernelSpec& gt, const FonsecaParams& p) {
  require_split_children(gs, gt, "fonseca_steel");
  return KernelSpec(std::make_shared<FonsecaNode>(gs, gt, p));
}

KernelSpec matern_mixture(const KernelSpec& gs, const KernelSpec& gt, const Eigen::VectorXd& nu) {
  require_split_children(gs, gt, "matern_mixture");
  return KernelSpec(std::make_shared<MaternMixtureNode>(gs, gt, nu));
}

KernelSpec transport_mixture(const KernelSpec& g1, const KernelSpec& g2, const TripleLaplace& l,
                             const VelocitySampler& sampler, int n_mc, std::uint64_t seed) {
  return KernelSpec(std::make_shared<TransportMixtureNode>(g1, g2, l, sampler, n_mc, seed));
}

}  // namespace covkit
