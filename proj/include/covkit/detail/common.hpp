#pragma once

#include <cmath>
#include <string>

#include <Eigen/Dense>
#include <json.hpp>

#include "covkit/errors.hpp"
#include "covkit/kernel.hpp"

namespace covkit::detail {

inline double squared_distance(PointView x, PointView y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return s;
}

inline PointView head(PointView x, int n) { return x.subspan(0, static_cast<std::size_t>(n)); }
inline PointView tail(PointView x, int from) { return x.subspan(static_cast<std::size_t>(from)); }

inline Point shifted(PointView x, const Eigen::VectorXd& shift, double sign = 1.0) {
  Point out(x.begin(), x.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += sign * shift(static_cast<Eigen::Index>(i));
  return out;
}

inline Point zeros(int n) { return Point(static_cast<std::size_t>(n), 0.0); }

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);
nlohmann::json vector_to_json(const Eigen::VectorXd& v);
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, const std::string& what);
Eigen::VectorXd vector_from_json(const nlohmann::json& j, const std::string& what);

/// Minimum eigenvalue relative to the largest absolute eigenvalue (0 for the
/// zero matrix).
double relative_min_eigenvalue(const Eigen::MatrixXd& m);
bool is_psd(const Eigen::MatrixXd& m, double tol = 1e-10);
bool is_symmetric(const Eigen::MatrixXd& m, double tol = 1e-12);

void require(bool ok, const std::string& message);
void require_same_m(const std::vector<KernelSpec>& specs, const std::string& op);
void require_same_domain(const std::vector<KernelSpec>& specs, const std::string& op);

Block ones(int m);

/// Entrywise chain rule: given partials of g and (f(g), f'(g), f''(g)) for
/// every entry, returns partials of f(g).
template <class F>
Partials chain(const Partials& g, F&& f) {
  Partials out{g.value, g.first, g.second};
  for (Eigen::Index i = 0; i < g.value.rows(); ++i) {
    for (Eigen::Index j = 0; j < g.value.cols(); ++j) {
      double f0 = 0.0, f1 = 0.0, f2 = 0.0;
      f(g.value(i, j), f0, f1, f2);
      const double g1 = g.first(i, j);
      out.value(i, j) = f0;
      out.first(i, j) = f1 * g1;
      out.second(i, j) = f2 * g1 * g1 + f1 * g.second(i, j);
    }
  }
  return out;
}

}  // namespace covkit::detail

namespace covkit::detail {

/// Node applying a scalar map to every entry of a single child.
class EntrywiseNode : public Node {
 public:
  EntrywiseNode(std::string op, const KernelSpec& child)
      : Node(std::move(op), child.m(), child.domain(), {child}) {}

  const KernelSpec& child() const { return children()[0]; }

  Block evaluate(PointView x, PointView y) const override {
    Block g = child().node().evaluate(x, y);
    for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = apply(g.data()[i]);
    return g;
  }

  virtual double apply(double g) const = 0;

  /// f, f' and f'' at g; only called when smooth() is true.
  virtual void apply_with_derivatives(double g, double& f0, double& f1, double& f2) const {
    f0 = apply(g);
    f1 = f2 = 0.0;
    throw SpecError(op() + ": map is not differentiable");
  }
  virtual bool smooth() const { return false; }

  bool differentiable(int coord) const override {
    return smooth() && child().node().differentiable(coord);
  }
  Partials partials(PointView x, PointView y, int coord) const override {
    if (!smooth()) return Node::partials(x, y, coord);
    return chain(child().node().partials(x, y, coord),
                 [this](double g, double& f0, double& f1, double& f2) {
                   apply_with_derivatives(g, f0, f1, f2);
                 });
  }
};

/// Evaluates a spatial child on the first d coordinates and a temporal child
/// on the remaining k, then combines the two m x m matrices entrywise.
class SpaceTimePairNode : public Node {
 public:
  SpaceTimePairNode(std::string op, const KernelSpec& spatial, const KernelSpec& temporal)
      : Node(std::move(op), spatial.m(),
             Domain{spatial.domain().total(), temporal.domain().total()}, {spatial, temporal}) {
    if (spatial.m() != temporal.m()) throw ShapeError(this->op() + ": m mismatch");
  }

  const KernelSpec& spatial() const { return children()[0]; }
  const KernelSpec& temporal() const { return children()[1]; }

  Block evaluate(PointView x, PointView y) const override {
    const int d = domain().space;
    const Block s = spatial().node().evaluate(head(x, d), head(y, d));
    const Block t = temporal().node().evaluate(tail(x, d), tail(y, d));
    Block out(m(), m());
    for (int i = 0; i < m(); ++i)
      for (int j = 0; j < m(); ++j) out(i, j) = combine(i, j, s(i, j), t(i, j));
    return out;
  }

  virtual double combine(int i, int j, double s, double t) const = 0;

 protected:
  bool both_pseudo() const {
    return spatial().claims().pseudo_variogram && temporal().claims().pseudo_variogram;
  }
};

}  // namespace covkit::detail
