#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace covkit {

/// Split of a location vector into d spatial and k temporal coordinates.
struct Domain {
  int space = 1;
  int time = 0;
  int total() const noexcept { return space + time; }
  bool operator==(const Domain&) const = default;
};

using Point = std::vector<double>;
using PointView = std::span<const double>;
using Block = Eigen::MatrixXd;

/// Ordered, non-empty list of locations in R^{d+k}.
class PointSet {
 public:
  PointSet(Domain domain, std::vector<Point> points);

  Domain domain() const noexcept { return domain_; }
  std::size_t size() const noexcept { return points_.size(); }
  PointView operator[](std::size_t i) const { return points_[i]; }
  const std::vector<Point>& points() const noexcept { return points_; }

 private:
  Domain domain_;
  std::vector<Point> points_;
};

/// Definiteness claims carried by a kernel. They record which closure
/// theorem the construction relies on; they are not numerical certificates.
struct Claims {
  bool positive_definite = false;
  bool conditionally_negative_definite = false;
  bool pseudo_variogram = false;  // CND with vanishing coincident diagonal
  bool cross_variogram = false;
  bool infinitely_divisible = false;  // every Hadamard power is PD

  bool operator==(const Claims&) const = default;
};

enum class KernelKind {
  claimed_positive_definite,
  claimed_conditionally_negative_definite,
  claimed_pseudo_variogram,
  unvalidated,
};

std::string_view to_string(KernelKind kind);

class Node;

/// Value, first and second partial derivative of a kernel with respect to
/// one coordinate of its first argument.
struct Partials {
  Block value;
  Block first;
  Block second;
};

/// Immutable handle to an expression tree describing an m x m matrix-valued
/// kernel on R^{d+k}. Cheap to copy and safe to share across threads.
class KernelSpec {
 public:
  explicit KernelSpec(std::shared_ptr<const Node> node);

  int m() const;
  Domain domain() const;
  const Claims& claims() const;
  KernelKind kind() const;
  bool stationary() const;
  std::string_view op() const;
  const Node& node() const { return *node_; }

  /// Evaluates K(x, y); dimension mismatches throw ShapeError and failures
  /// inside the tree are rethrown as EvaluationError with location context.
  Block evaluate(PointView x, PointView y) const;

  nlohmann::json to_json() const;

  /// Structural equality of the expression trees.
  bool operator==(const KernelSpec& other) const;

 private:
  std::shared_ptr<const Node> node_;
};

class Node {
 public:
  Node(std::string op, int m, Domain domain, std::vector<KernelSpec> children = {});
  virtual ~Node() = default;
  Node(const Node&) = delete;
  Node& operator=(const Node&) = delete;

  const std::string& op() const noexcept { return op_; }
  int m() const noexcept { return m_; }
  Domain domain() const noexcept { return domain_; }
  const std::vector<KernelSpec>& children() const noexcept { return children_; }
  const Claims& claims() const noexcept { return claims_; }

  virtual Block evaluate(PointView x, PointView y) const = 0;
  virtual nlohmann::json params() const;

  /// Whether K(x, y) depends on x - y only. Defaults to "all children are".
  virtual bool stationary() const;

  /// Closed-form partials with respect to coordinate `coord` of x; the
  /// default reports the node as non-smooth.
  virtual bool differentiable(int coord) const;
  virtual Partials partials(PointView x, PointView y, int coord) const;

 protected:
  Claims claims_;

 private:
  std::string op_;
  int m_;
  Domain domain_;
  std::vector<KernelSpec> children_;
};

/// Free-function form of KernelSpec::evaluate.
Block evaluate_block(const KernelSpec& spec, PointView x, PointView y);

// Leaf families.
KernelSpec constant_kernel(int m, Domain domain, double value);
KernelSpec constant_matrix_kernel(Domain domain, const Eigen::MatrixXd& value);
KernelSpec exponential_kernel(int m, Domain domain, double scale = 1.0,
                              std::optional<Eigen::MatrixXd> sill = std::nullopt);
KernelSpec gaussian_kernel(int m, Domain domain, double scale = 1.0,
                           std::optional<Eigen::MatrixXd> sill = std::nullopt);
/// coef * ||x - y||^power, any power > 0. Claims CND only for power <= 2 and
/// coef >= 0; intended for probing invalid models.
KernelSpec distance_power_kernel(int m, Domain domain, double power, double coef = 1.0);
/// Diagonal kernel delta_ij * sin(||x - y|| / scale); indefinite.
KernelSpec sin_distance_kernel(int m, Domain domain, double scale = 1.0);

// Combinators.
KernelSpec combine_sum(std::vector<KernelSpec> terms);
KernelSpec combine_sum(const KernelSpec& a, const KernelSpec& b);
KernelSpec combine_schur(std::vector<KernelSpec> factors);
KernelSpec combine_schur(const KernelSpec& a, const KernelSpec& b);
KernelSpec scale(const KernelSpec& spec, double factor);
/// spec + c * 1 1^T.
KernelSpec constant_shift(const KernelSpec& spec, double c);

}  // namespace covkit
