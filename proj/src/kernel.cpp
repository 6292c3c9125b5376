#include "covkit/kernel.hpp"

#include <sstream>

#include "covkit/detail/common.hpp"
#include "covkit/linalg_special.hpp"

namespace covkit {

// ---------------------------------------------------------------------------
// detail helpers

namespace detail {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw SpecError(what + ": expected a non-empty matrix");
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (!j[0].is_array()) throw SpecError(what + ": expected an array of rows");
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw SpecError(what + ": ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (!row[static_cast<std::size_t>(c)].is_number())
        throw SpecError(what + ": non-numeric entry");
      m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
  }
  return m;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array()) throw SpecError(what + ": expected an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw SpecError(what + ": non-numeric entry");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

double relative_min_eigenvalue(const Eigen::MatrixXd& m) {
  const EigenResult r = min_eigenvalue(SymMatrix(m));
  if (r.max_abs_eigenvalue == 0.0) return 0.0;
  return r.min_eigenvalue / r.max_abs_eigenvalue;
}

bool is_psd(const Eigen::MatrixXd& m, double tol) {
  return relative_min_eigenvalue(m) >= -tol;
}

bool is_symmetric(const Eigen::MatrixXd& m, double tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw SpecError(message);
}

void require_same_m(const std::vector<KernelSpec>& specs, const std::string& op) {
  for (const auto& s : specs)
    if (s.m() != specs.front().m())
      throw ShapeError(op + ": children have different numbers of variables");
}

void require_same_domain(const std::vector<KernelSpec>& specs, const std::string& op) {
  for (const auto& s : specs)
    if (!(s.domain() == specs.front().domain()))
      throw ShapeError(op + ": children have different domains");
}

Block ones(int m) { return Block::Ones(m, m); }

}  // namespace detail

using detail::squared_distance;

// ---------------------------------------------------------------------------
// PointSet / KernelSpec / Node

PointSet::PointSet(Domain domain, std::vector<Point> points)
    : domain_(domain), points_(std::move(points)) {
  if (points_.empty()) throw ShapeError("PointSet needs at least one point");
  if (domain_.space < 0 || domain_.time < 0) throw ShapeError("negative dimension");
  for (const auto& p : points_)
    if (static_cast<int>(p.size()) != domain_.total())
      throw ShapeError("PointSet: point length does not match d + k");
}

std::string_view to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::claimed_positive_definite: return "claimed_positive_definite";
    case KernelKind::claimed_conditionally_negative_definite:
      return "claimed_conditionally_negative_definite";
    case KernelKind::claimed_pseudo_variogram: return "claimed_pseudo_variogram";
    case KernelKind::unvalidated: return "unvalidated";
  }
  return "unvalidated";
}

KernelSpec::KernelSpec(std::shared_ptr<const Node> node) : node_(std::move(node)) {
  if (!node_) throw SpecError("KernelSpec: null node");
}

int KernelSpec::m() const { return node_->m(); }
Domain KernelSpec::domain() const { return node_->domain(); }
const Claims& KernelSpec::claims() const { return node_->claims(); }
bool KernelSpec::stationary() const { return node_->stationary(); }
std::string_view KernelSpec::op() const { return node_->op(); }

KernelKind KernelSpec::kind() const {
  const Claims& c = claims();
  if (c.pseudo_variogram) return KernelKind::claimed_pseudo_variogram;
  if (c.positive_definite) return KernelKind::claimed_positive_definite;
  if (c.conditionally_negative_definite)
    return KernelKind::claimed_conditionally_negative_definite;
  return KernelKind::unvalidated;
}

namespace {

std::string format_point(PointView p) {
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (std::size_t i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
  os << ')';
  return os.str();
}

}  // namespace

Block KernelSpec::evaluate(PointView x, PointView y) const {
  const auto n = static_cast<std::size_t>(domain().total());
  if (x.size() != n || y.size() != n)
    throw ShapeError("evaluate: point dimension " + std::to_string(x.size()) +
                     " does not match kernel dimension " + std::to_string(n));
  try {
    return node_->evaluate(x, y);
  } catch (const EvaluationError&) {
    throw;
  } catch (const DomainError& e) {
    throw EvaluationError(std::string(e.what()) + " at x=" + format_point(x) +
                          ", y=" + format_point(y));
  }
}

nlohmann::json KernelSpec::to_json() const {
  nlohmann::json j;
  j["op"] = node_->op();
  j["params"] = node_->params();
  nlohmann::json kids = nlohmann::json::array();
  for (const auto& c : node_->children()) kids.push_back(c.to_json());
  j["children"] = std::move(kids);
  return j;
}

bool KernelSpec::operator==(const KernelSpec& other) const {
  return m() == other.m() && domain() == other.domain() && claims() == other.claims() &&
         to_json() == other.to_json();
}

Block evaluate_block(const KernelSpec& spec, PointView x, PointView y) {
  return spec.evaluate(x, y);
}

Node::Node(std::string op, int m, Domain domain, std::vector<KernelSpec> children)
    : op_(std::move(op)), m_(m), domain_(domain), children_(std::move(children)) {
  if (m_ < 1) throw ShapeError(op_ + ": number of variables must be >= 1");
  if (domain_.space < 0 || domain_.time < 0) throw ShapeError(op_ + ": negative dimension");
}

nlohmann::json Node::params() const { return nlohmann::json::object(); }

bool Node::stationary() const {
  for (const auto& c : children_)
    if (!c.stationary()) return false;
  return true;
}

bool Node::differentiable(int) const { return false; }

Partials Node::partials(PointView, PointView, int) const {
  throw SpecError(op_ + ": no closed-form derivatives for this family");
}

// ---------------------------------------------------------------------------
// Leaves

namespace {

class ConstantNode final : public Node {
 public:
  ConstantNode(Domain domain, Eigen::MatrixXd value, bool scalar)
      : Node("constant", static_cast<int>(value.rows()), domain),
        value_(std::move(value)),
        scalar_(scalar) {
    detail::require(detail::is_symmetric(value_), "constant: matrix must be symmetric");
    const bool psd = detail::is_psd(value_, 1e-12);
    claims_.positive_definite = psd;
    claims_.infinitely_divisible = psd && (value_.array() >= 0.0).all() && scalar_;
    // Quadratic form on the contrast subspace is (sum a)^T M (sum a).
    const int m = this->m();
    if (m == 1) {
      claims_.conditionally_negative_definite = true;
    } else {
      // Orthonormal basis of the complement of 1.
      Eigen::MatrixXd full = Eigen::MatrixXd::Identity(m, m);
      full.array() -= 1.0 / m;
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(full.leftCols(m - 1));
      const Eigen::MatrixXd basis = qr.householderQ() * Eigen::MatrixXd::Identity(m, m - 1);
      const Eigen::MatrixXd restricted = basis.transpose() * value_ * basis;
      const double scale = std::max(1.0, value_.cwiseAbs().maxCoeff());
      claims_.conditionally_negative_definite =
          min_eigenvalue(SymMatrix(restricted)).max_eigenvalue <= 1e-12 * scale;
    }
    claims_.pseudo_variogram = claims_.conditionally_negative_definite &&
                               value_.diagonal().cwiseAbs().maxCoeff() == 0.0;
  }

  Block evaluate(PointView, PointView) const override { return value_; }
  nlohmann::json params() const override {
    if (scalar_) return {{"value", value_(0, 0)}};
    return {{"matrix", detail::matrix_to_json(value_)}};
  }
  bool stationary() const override { return true; }
  bool differentiable(int) const override { return true; }
  Partials partials(PointView, PointView, int) const override {
    const Block z = Block::Zero(m(), m());
    return {value_, z, z};
  }

 private:
  Eigen::MatrixXd value_;
  bool scalar_;
};

Eigen::MatrixXd sill_or_ones(int m, const std::optional<Eigen::MatrixXd>& sill,
                             const std::string& op) {
  if (!sill) return Eigen::MatrixXd::Ones(m, m);
  if (sill->rows() != m || sill->cols() != m)
    throw ShapeError(op + ": sill matrix must be m x m");
  detail::require(detail::is_symmetric(*sill), op + ": sill matrix must be symmetric");
  return *sill;
}

/// sill_ij * profile(||x - y|| / scale)
class RadialCovarianceNode final : public Node {
 public:
  enum class Profile { exponential, gaussian };

  RadialCovarianceNode(Profile profile, int m, Domain domain, double scale,
                       Eigen::MatrixXd sill, bool explicit_sill)
      : Node(profile == Profile::exponential ? "exponential" : "gaussian", m, domain),
        profile_(profile),
        scale_(scale),
        sill_(std::move(sill)),
        explicit_sill_(explicit_sill) {
    detail::require(scale_ > 0.0 && std::isfinite(scale_), op() + ": scale must be positive");
    claims_.positive_definite = detail::is_psd(sill_, 1e-12);
  }

  Block evaluate(PointView x, PointView y) const override {
    const double r2 = squared_distance(x, y) / (scale_ * scale_);
    const double v = profile_ == Profile::exponential ? std::exp(-std::sqrt(r2)) : std::exp(-r2);
    return sill_ * v;
  }
  nlohmann::json params() const override {
    nlohmann::json j{{"scale", scale_}};
    if (explicit_sill_) j["sill"] = detail::matrix_to_json(sill_);
    return j;
  }
  bool stationary() const override { return true; }
  bool differentiable(int) const override { return profile_ == Profile::gaussian; }
  Partials partials(PointView x, PointView y, int coord) const override {
    if (profile_ != Profile::gaussian) return Node::partials(x, y, coord);
    const double s2 = scale_ * scale_;
    const double e = std::exp(-squared_distance(x, y) / s2);
    const double h = x[coord] - y[coord];
    return {sill_ * e, sill_ * (-2.0 * h / s2 * e),
            sill_ * ((-2.0 / s2 + 4.0 * h * h / (s2 * s2)) * e)};
  }

 private:
  Profile profile_;
  double scale_;
  Eigen::MatrixXd sill_;
  bool explicit_sill_;
};

class DistancePowerNode final : public Node {
 public:
  DistancePowerNode(int m, Domain domain, double power, double coef)
      : Node("distance_power", m, domain), power_(power), coef_(coef) {
    detail::require(power_ > 0.0 && std::isfinite(power_), "distance_power: power must be positive");
    detail::require(std::isfinite(coef_), "distance_power: coefficient must be finite");
    const bool valid = power_ <= 2.0 && coef_ >= 0.0;
    claims_.conditionally_negative_definite = valid;
    claims_.pseudo_variogram = valid;
  }

  Block evaluate(PointView x, PointView y) const override {
    const double r2 = squared_distance(x, y);
    const double v = r2 == 0.0 ? 0.0 : coef_ * std::pow(r2, 0.5 * power_);
    return Block::Constant(m(), m(), v);
  }
  nlohmann::json params() const override { return {{"power", power_}, {"coef", coef_}}; }
  bool stationary() const override { return true; }
  bool differentiable(int) const override { return power_ >= 2.0; }
  Partials partials(PointView x, PointView y, int coord) const override {
    if (power_ < 2.0) return Node::partials(x, y, coord);
    const double r2 = squared_distance(x, y);
    const double h = x[coord] - y[coord];
    const double p = power_;
    double f = 0.0, f1 = 0.0, f2 = 0.0;
    if (r2 > 0.0) {
      f = coef_ * std::pow(r2, 0.5 * p);
      f1 = coef_ * p * std::pow(r2, 0.5 * p - 1.0) * h;
      f2 = coef_ * (p * std::pow(r2, 0.5 * p - 1.0) +
                    (p == 2.0 ? 0.0 : p * (p - 2.0) * std::pow(r2, 0.5 * p - 2.0) * h * h));
    } else if (p == 2.0) {
      f2 = 2.0 * coef_;
    }
    return {Block::Constant(m(), m(), f), Block::Constant(m(), m(), f1),
            Block::Constant(m(), m(), f2)};
  }

 private:
  double power_;
  double coef_;
};

class SinDistanceNode final : public Node {
 public:
  SinDistanceNode(int m, Domain domain, double scale)
      : Node("sin_distance", m, domain), scale_(scale) {
    detail::require(scale_ > 0.0, "sin_distance: scale must be positive");
  }
  Block evaluate(PointView x, PointView y) const override {
    const double v = std::sin(std::sqrt(squared_distance(x, y)) / scale_);
    return Block::Identity(m(), m()) * v;
  }
  nlohmann::json params() const override { return {{"scale", scale_}}; }
  bool stationary() const override { return true; }

 private:
  double scale_;
};

// ---------------------------------------------------------------------------
// Combinators

class SumNode final : public Node {
 public:
  explicit SumNode(std::vector<KernelSpec> terms)
      : Node("sum", terms.at(0).m(), terms.at(0).domain(), terms) {
    Claims c{true, true, true, false, false};
    for (const auto& t : children()) {
      c.positive_definite &= t.claims().positive_definite;
      c.conditionally_negative_definite &= t.claims().conditionally_negative_definite;
      c.pseudo_variogram &= t.claims().pseudo_variogram;
    }
    claims_ = c;
  }
  Block evaluate(PointView x, PointView y) const override {
    Block out = children()[0].node().evaluate(x, y);
    for (std::size_t i = 1; i < children().size(); ++i) out += children()[i].node().evaluate(x, y);
    return out;
  }
  bool differentiable(int coord) const override {
    for (const auto& c : children())
      if (!c.node().differentiable(coord)) return false;
    return true;
  }
  Partials partials(PointView x, PointView y, int coord) const override {
    Partials out = children()[0].node().partials(x, y, coord);
    for (std::size_t i = 1; i < children().size(); ++i) {
      const Partials p = children()[i].node().partials(x, y, coord);
      out.value += p.value;
      out.first += p.first;
      out.second += p.second;
    }
    return out;
  }
};

class SchurNode final : public Node {
 public:
  explicit SchurNode(std::vector<KernelSpec> factors)
      : Node("schur", factors.at(0).m(), factors.at(0).domain(), factors) {
    claims_.positive_definite = true;
    claims_.infinitely_divisible = true;
    for (const auto& f : children()) {
      claims_.positive_definite &= f.claims().positive_definite;
      claims_.infinitely_divisible &= f.claims().infinitely_divisible;
    }
  }
  Block evaluate(PointView x, PointView y) const override {
    Block out = children()[0].node().evaluate(x, y);
    for (std::size_t i = 1; i < children().size(); ++i)
      out.array() *= children()[i].node().evaluate(x, y).array();
    return out;
  }
  bool differentiable(int coord) const override {
    for (const auto& c : children())
      if (!c.node().differentiable(coord)) return false;
    return true;
  }
  Partials partials(PointView x, PointView y, int coord) const override {
    Partials f = children()[0].node().partials(x, y, coord);
    for (std::size_t i = 1; i < children().size(); ++i) {
      const Partials g = children()[i].node().partials(x, y, coord);
      Partials h;
      h.value = f.value.cwiseProduct(g.value);
      h.first = f.first.cwiseProduct(g.value) + f.value.cwiseProduct(g.first);
      h.second = f.second.cwiseProduct(g.value) + 2.0 * f.first.cwiseProduct(g.first) +
                 f.value.cwiseProduct(g.second);
      f = std::move(h);
    }
    return f;
  }
};

class ScaleNode final : public Node {
 public:
  ScaleNode(const KernelSpec& child, double factor)
      : Node("scale", child.m(), child.domain(), {child}), factor_(factor) {
    detail::require(factor_ > 0.0 && std::isfinite(factor_), "scale: factor must be positive");
    claims_ = child.claims();
  }
  Block evaluate(PointView x, PointView y) const override {
    return factor_ * children()[0].node().evaluate(x, y);
  }
  nlohmann::json params() const override { return {{"factor", factor_}}; }
  bool differentiable(int coord) const override {
    return children()[0].node().differentiable(coord);
  }
  Partials partials(PointView x, PointView y, int coord) const override {
    Partials p = children()[0].node().partials(x, y, coord);
    p.value *= factor_;
    p.first *= factor_;
    p.second *= factor_;
    return p;
  }

 private:
  double factor_;
};

class ConstantShiftNode final : public Node {
 public:
  ConstantShiftNode(const KernelSpec& child, double c)
      : Node("constant_shift", child.m(), child.domain(), {child}), c_(c) {
    detail::require(std::isfinite(c_), "constant_shift: value must be finite");
    const Claims& k = child.claims();
    claims_.positive_definite = k.positive_definite && c_ >= 0.0;
    claims_.conditionally_negative_definite = k.conditionally_negative_definite;
    claims_.pseudo_variogram = k.pseudo_variogram && c_ == 0.0;
  }
  Block evaluate(PointView x, PointView y) const override {
    return children()[0].node().evaluate(x, y).array() + c_;
  }
  nlohmann::json params() const override { return {{"value", c_}}; }
  bool differentiable(int coord) const override {
    return children()[0].node().differentiable(coord);
  }
  Partials partials(PointView x, PointView y, int coord) const override {
    Partials p = children()[0].node().partials(x, y, coord);
    p.value.array() += c_;
    return p;
  }

 private:
  double c_;
};

}  // namespace

KernelSpec constant_kernel(int m, Domain domain, double value) {
  if (m < 1) throw ShapeError("constant: m must be >= 1");
  detail::require(std::isfinite(value), "constant: value must be finite");
  return KernelSpec(std::make_shared<ConstantNode>(domain, Eigen::MatrixXd::Constant(m, m, value), true));
}

KernelSpec constant_matrix_kernel(Domain domain, const Eigen::MatrixXd& value) {
  if (value.rows() != value.cols() || value.rows() < 1)
    throw ShapeError("constant: matrix must be square");
  return KernelSpec(std::make_shared<ConstantNode>(domain, value, false));
}

KernelSpec exponential_kernel(int m, Domain domain, double scale,
                              std::optional<Eigen::MatrixXd> sill) {
  const bool explicit_sill = sill.has_value();
  return KernelSpec(std::make_shared<RadialCovarianceNode>(
      RadialCovarianceNode::Profile::exponential, m, domain, scale,
      sill_or_ones(m, sill, "exponential"), explicit_sill));
}

KernelSpec gaussian_kernel(int m, Domain domain, double scale,
                           std::optional<Eigen::MatrixXd> sill) {
  const bool explicit_sill = sill.has_value();
  return KernelSpec(std::make_shared<RadialCovarianceNode>(
      RadialCovarianceNode::Profile::gaussian, m, domain, scale,
      sill_or_ones(m, sill, "gaussian"), explicit_sill));
}

KernelSpec distance_power_kernel(int m, Domain domain, double power, double coef) {
  return KernelSpec(std::make_shared<DistancePowerNode>(m, domain, power, coef));
}

KernelSpec sin_distance_kernel(int m, Domain domain, double scale) {
  return KernelSpec(std::make_shared<SinDistanceNode>(m, domain, scale));
}

KernelSpec combine_sum(std::vector<KernelSpec> terms) {
  if (terms.empty()) throw ShapeError("sum: needs at least one term");
  detail::require_same_m(terms, "sum");
  detail::require_same_domain(terms, "sum");
  return KernelSpec(std::make_shared<SumNode>(std::move(terms)));
}

KernelSpec combine_sum(const KernelSpec& a, const KernelSpec& b) { return combine_sum({a, b}); }

KernelSpec combine_schur(std::vector<KernelSpec> factors) {
  if (factors.empty()) throw ShapeError("schur: needs at least one factor");
  detail::require_same_m(factors, "schur");
  detail::require_same_domain(factors, "schur");
  return KernelSpec(std::make_shared<SchurNode>(std::move(factors)));
}

KernelSpec combine_schur(const KernelSpec& a, const KernelSpec& b) { return combine_schur({a, b}); }

KernelSpec scale(const KernelSpec& spec, double factor) {
  return KernelSpec(std::make_shared<ScaleNode>(spec, factor));
}

KernelSpec constant_shift(const KernelSpec& spec, double c) {
  return KernelSpec(std::make_shared<ConstantShiftNode>(spec, c));
}

}  // namespace covkit
