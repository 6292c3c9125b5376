#include "covkit/stationary.hpp"

#include <cmath>
#include <sstream>

#include "covkit/detail/common.hpp"

namespace covkit {

using detail::require;

namespace {

class SchoenbergNode final : public detail::EntrywiseNode {
 public:
  SchoenbergNode(const KernelSpec& gamma, double t) : EntrywiseNode("schoenberg_exp", gamma), t_(t) {
    require(t_ > 0.0 && std::isfinite(t_), "schoenberg_exp: t must be positive");
    const bool cnd = gamma.claims().conditionally_negative_definite;
    claims_.positive_definite = cnd;
    claims_.infinitely_divisible = cnd;
  }
  double apply(double g) const override { return std::exp(-t_ * g); }
  bool smooth() const override { return true; }
  void apply_with_derivatives(double g, double& f0, double& f1, double& f2) const override {
    f0 = std::exp(-t_ * g);
    f1 = -t_ * f0;
    f2 = t_ * t_ * f0;
  }
  nlohmann::json params() const override { return {{"t", t_}}; }

 private:
  double t_;
};

// Cov(Z(x + z) - Z(x), Z(y + z) - Z(y)) written with the pseudo
// cross-variogram; equals Gamma(h + z) + Gamma(h - z) - 2 Gamma(h) when
// Gamma is stationary.
class IncrementNode final : public Node {
 public:
  IncrementNode(const KernelSpec& gamma, Eigen::VectorXd z)
      : Node("increment", gamma.m(), gamma.domain(), {gamma}), z_(std::move(z)) {
    if (z_.size() != domain().total()) throw ShapeError("increment: z must have length d + k");
    claims_.positive_definite = gamma.claims().pseudo_variogram;
  }
  Block evaluate(PointView x, PointView y) const override {
    const Node& g = children()[0].node();
    const Point xz = detail::shifted(x, z_), yz = detail::shifted(y, z_);
    return g.evaluate(xz, y) + g.evaluate(x, yz) - g.evaluate(xz, yz) - g.evaluate(x, y);
  }
  nlohmann::json params() const override { return {{"z", detail::vector_to_json(z_)}}; }

 private:
  Eigen::VectorXd z_;
};

class RatioProductNode final : public Node {
 public:
  RatioProductNode(const KernelSpec& gamma, Eigen::VectorXd z, double c)
      : Node("ratio_product", gamma.m(), gamma.domain(), {gamma}), z_(std::move(z)), c_(c) {
    if (z_.size() != domain().total()) throw ShapeError("ratio_product: z must have length d + k");
    require(c_ >= -1.0 && std::isfinite(c_), "ratio_product: c must be >= -1");
    claims_.positive_definite = gamma.claims().pseudo_variogram && gamma.stationary();
  }
  Block evaluate(PointView x, PointView y) const override {
    const Node& g = children()[0].node();
    const Block gp = g.evaluate(detail::shifted(x, z_), y);
    const Block gm = g.evaluate(detail::shifted(x, z_, -1.0), y);
    const Block g0 = g.evaluate(x, y);
    return ((1.0 + gp.array()) * (1.0 + gm.array()) / (1.0 + g0.array()).square() + c_).matrix();
  }
  nlohmann::json params() const override { return {{"z", detail::vector_to_json(z_)}, {"c", c_}}; }

 private:
  Eigen::VectorXd z_;
  double c_;
};

std::vector<KernelSpec> component_children(const std::vector<GaussianComponent>& comps) {
  std::vector<KernelSpec> out;
  for (const auto& c : comps) out.push_back(c.gamma);
  return out;
}

/// Shared machinery of the Gaussian-extended and Lagrangian models.
class AnisotropicBase : public Node {
 public:
  AnisotropicBase(std::string op, int m, Domain domain, Eigen::MatrixXd sigma,
                  const std::vector<GaussianComponent>& comps)
      : Node(std::move(op), m, domain, component_children(comps)), sigma_(std::move(sigma)) {
    const int d = domain.space, k = domain.time;
    if (sigma_.rows() != d || sigma_.cols() != d) throw ShapeError(this->op() + ": Sigma must be d x d");
    require(detail::is_symmetric(sigma_), this->op() + ": Sigma must be symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(sigma_);
    require(llt.info() == Eigen::Success, this->op() + ": Sigma must be positive definite");
    bool cnd = true;
    for (const auto& c : comps) {
      if (c.sigma.rows() != d || c.sigma.cols() != d)
        throw ShapeError(this->op() + ": component matrices must be d x d");
      require(detail::is_symmetric(c.sigma) && detail::is_psd(c.sigma, 1e-12),
              this->op() + ": component matrices must be symmetric PSD");
      if (c.gamma.m() != m) throw ShapeError(this->op() + ": component m mismatch");
      if (!(c.gamma.domain() == Domain{k, 0}))
        throw ShapeError(this->op() + ": component variograms must live on R^k");
      cnd &= c.gamma.claims().conditionally_negative_definite;
      sigmas_.push_back(c.sigma);
    }
    cnd_components_ = cnd;
  }

 protected:
  struct Factor {
    Eigen::LLT<Eigen::MatrixXd> llt;
    double inv_sqrt_det = 1.0;
  };

  // Per-entry Cholesky factors of A_ij(u).
  std::vector<Factor> factors(PointView x, PointView y) const {
    const int d = domain().space;
    std::vector<Block> g;
    for (const auto& c : children())
      g.push_back(c.node().evaluate(detail::tail(x, d), detail::tail(y, d)));
    std::vector<Factor> out(static_cast<std::size_t>(m() * m()));
    for (int i = 0; i < m(); ++i)
      for (int j = 0; j < m(); ++j) {
        Eigen::MatrixXd a = sigma_;
        for (std::size_t l = 0; l < g.size(); ++l) a += g[l](i, j) * sigmas_[l];
        Factor& f = out[static_cast<std::size_t>(i * m() + j)];
        f.llt.compute(a);
        if (f.llt.info() != Eigen::Success) {
          std::ostringstream os;
          os << op() << ": A_ij(u) is not positive definite at (i=" << i << ", j=" << j << ")";
          throw EvaluationError(os.str());
        }
        const Eigen::VectorXd diag = f.llt.matrixL().toDenseMatrix().diagonal();
        f.inv_sqrt_det = 1.0 / diag.prod();
      }
    return out;
  }

  nlohmann::json base_params() const {
    nlohmann::json comps = nlohmann::json::array();
    for (const auto& s : sigmas_) comps.push_back(detail::matrix_to_json(s));
    return {{"sigma", detail::matrix_to_json(sigma_)}, {"component_sigmas", comps}};
  }

  Eigen::MatrixXd sigma_;
  std::vector<Eigen::MatrixXd> sigmas_;
  bool cnd_components_ = true;
};

class GaussianExtendedNode final : public AnisotropicBase {
 public:
  GaussianExtendedNode(int m, Domain domain, Eigen::MatrixXd sigma,
                       const std::vector<GaussianComponent>& comps)
      : AnisotropicBase("gaussian_extended", m, domain, std::move(sigma), comps) {
    claims_.positive_definite = cnd_components_;
  }
  Block evaluate(PointView x, PointView y) const override {
    const int d = domain().space;
    Eigen::VectorXd h(d);
    for (int c = 0; c < d; ++c) h(c) = x[c] - y[c];
    const auto f = factors(x, y);
    Block out(m(), m());
    for (int i = 0; i < m(); ++i)
      for (int j = 0; j < m(); ++j) {
        const Factor& fij = f[static_cast<std::size_t>(i * m() + j)];
        const double q = fij.llt.matrixL().solve(h).squaredNorm();
        out(i, j) = fij.inv_sqrt_det * std::exp(-0.5 * q);
      }
    return out;
  }
  nlohmann::json params() const override { return base_params(); }
};

class LagrangianNode final : public AnisotropicBase {
 public:
  LagrangianNode(int m, Domain domain, Eigen::MatrixXd sigma,
                 const std::vector<GaussianComponent>& comps, Eigen::VectorXd theta, Mixture1D mix)
      : AnisotropicBase("lagrangian_mixture", m, domain, std::move(sigma), comps),
        theta_(std::move(theta)),
        mix_(std::move(mix)) {
    if (domain.time != 1) throw ShapeError("lagrangian_mixture: needs exactly one time coordinate");
    if (theta_.size() != domain.space) throw ShapeError("lagrangian_mixture: theta must have length d");
    mix_.validate(m);
    claims_.positive_definite = cnd_components_;
  }
  Block evaluate(PointView x, PointView y) const override {
    const int d = domain().space;
    const double u = x[d] - y[d];
    Eigen::VectorXd h(d);
    for (int c = 0; c < d; ++c) h(c) = x[c] - y[c] + theta_(c) * u;
    const auto f = factors(x, y);
    Block out(m(), m());
    for (int i = 0; i < m(); ++i)
      for (int j = 0; j < m(); ++j) {
        const Factor& fij = f[static_cast<std::size_t>(i * m() + j)];
        const double q = 0.5 * fij.llt.matrixL().solve(h).squaredNorm();
        double acc = 0.0;
        for (std::size_t n = 0; n < mix_.nodes.size(); ++n)
          acc += mix_.nodes[n].weight * mix_.density(n, i, j) * std::exp(-mix_.nodes[n].t * q);
        out(i, j) = fij.inv_sqrt_det * acc;
      }
    return out;
  }
  nlohmann::json params() const override {
    nlohmann::json j = base_params();
    j["theta"] = detail::vector_to_json(theta_);
    j["mixture"] = mix_.to_json();
    return j;
  }

 private:
  Eigen::VectorXd theta_;
  Mixture1D mix_;
};

class IsotropicDescentNode final : public Node {
 public:
  IsotropicDescentNode(int m, Domain domain, IsotropicProfile p)
      : Node("isotropic_descent", m, domain), p_(std::move(p)) {
    require(p_.scale > 0.0 && std::isfinite(p_.scale), "isotropic_descent: scale must be positive");
    require(p_.coef >= 0.0 && std::isfinite(p_.coef), "isotropic_descent: coef must be >= 0");
    if (p_.kind == RadialProfile::power_shift)
      require(p_.beta > 0.0 && p_.beta <= 1.0, "isotropic_descent: beta must lie in (0, 1]");
    bool ok = true;
    if (p_.cross) {
      if (p_.cross->rows() != m || p_.cross->cols() != m)
        throw ShapeError("isotropic_descent: cross matrix must be m x m");
      require(detail::is_symmetric(*p_.cross), "isotropic_descent: cross matrix must be symmetric");
      require(p_.cross_scale > 0.0, "isotropic_descent: cross_scale must be positive");
      ok = detail::is_psd(*p_.cross, 1e-12);
    }
    claims_.positive_definite = ok;
  }
  Block evaluate(PointView x, PointView y) const override {
    const double t = detail::squared_distance(x, y);
    Block out(m(), m());
    for (int i = 0; i < m(); ++i)
      for (int j = 0; j < m(); ++j) out(i, j) = p_.derivative(i, j, t);
    return out;
  }
  nlohmann::json params() const override {
    nlohmann::json j{{"profile", std::string(to_string(p_.kind))}, {"scale", p_.scale}, {"coef", p_.coef}};
    if (p_.kind == RadialProfile::power_shift) j["beta"] = p_.beta;
    if (p_.cross) {
      j["cross"] = detail::matrix_to_json(*p_.cross);
      j["cross_scale"] = p_.cross_scale;
    }
    return j;
  }
  bool stationary() const override { return true; }

 private:
  IsotropicProfile p_;
};

}  // namespace

std::string_view to_string(RadialProfile p) {
  switch (p) {
    case RadialProfile::identity: return "identity";
    case RadialProfile::one_minus_exp: return "one_minus_exp";
    case RadialProfile::power_shift: return "power_shift";
  }
  return "identity";
}

RadialProfile radial_profile_from_string(std::string_view name) {
  if (name == "identity") return RadialProfile::identity;
  if (name == "one_minus_exp") return RadialProfile::one_minus_exp;
  if (name == "power_shift") return RadialProfile::power_shift;
  throw SpecError("isotropic_descent: unknown profile '" + std::string(name) + "'");
}

double IsotropicProfile::value(int i, int j, double t) const {
  const double s = t / scale;
  double g = 0.0;
  switch (kind) {
    case RadialProfile::identity: g = s; break;
    case RadialProfile::one_minus_exp: g = -std::expm1(-s); break;
    case RadialProfile::power_shift: g = std::pow(1.0 + s, beta) - 1.0; break;
  }
  double out = coef * g;
  if (cross) {
    const auto& b = *cross;
    out += 0.5 * (b(i, i) + b(j, j)) - b(i, j) * std::exp(-t / cross_scale);
  }
  return out;
}

double IsotropicProfile::derivative(int i, int j, double t) const {
  const double s = t / scale;
  double g1 = 0.0;
  switch (kind) {
    case RadialProfile::identity: g1 = 1.0; break;
    case RadialProfile::one_minus_exp: g1 = std::exp(-s); break;
    case RadialProfile::power_shift: g1 = beta * std::pow(1.0 + s, beta - 1.0); break;
  }
  double out = coef * g1 / scale;
  if (cross) out += (*cross)(i, j) * std::exp(-t / cross_scale) / cross_scale;
  return out;
}

KernelSpec schoenberg_exp(const KernelSpec& gamma, double t) {
  return KernelSpec(std::make_shared<SchoenbergNode>(gamma, t));
}

KernelSpec increment_cov(const KernelSpec& gamma, const Eigen::VectorXd& z) {
  return KernelSpec(std::make_shared<IncrementNode>(gamma, z));
}

KernelSpec ratio_product_model(const KernelSpec& gamma, const Eigen::VectorXd& z, double c) {
  return KernelSpec(std::make_shared<RatioProductNode>(gamma, z, c));
}

KernelSpec gaussian_extended(int m, Domain domain, const Eigen::MatrixXd& sigma,
                             const std::vector<GaussianComponent>& components) {
  return KernelSpec(std::make_shared<GaussianExtendedNode>(m, domain, sigma, components));
}

KernelSpec lagrangian_mixture(int m, Domain domain, const Eigen::MatrixXd& sigma,
                              const std::vector<GaussianComponent>& components,
                              const Eigen::VectorXd& theta, const Mixture1D& mix) {
  return KernelSpec(std::make_shared<LagrangianNode>(m, domain, sigma, components, theta, mix));
}

KernelSpec isotropic_descent(int m, Domain domain, const IsotropicProfile& profile) {
  return KernelSpec(std::make_shared<IsotropicDescentNode>(m, domain, profile));
}

}  // namespace covkit
