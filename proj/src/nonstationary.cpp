#include "covkit/nonstationary.hpp"

#include <cmath>
#include <sstream>

#include "covkit/detail/common.hpp"
#include "covkit/linalg_special.hpp"

namespace covkit {

using detail::require;

namespace {

double dot(const Eigen::VectorXd& v, PointView x) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += v(i) * x[static_cast<std::size_t>(i)];
  return s;
}

void check_slope(const Eigen::VectorXd& v, int d, const char* what) {
  if (v.size() != 0 && v.size() != d)
    throw ShapeError(std::string("anisotropy field: ") + what + " must have length d");
}

std::string_view form_name(SigmaForm f) {
  switch (f) {
    case SigmaForm::constant: return "constant";
    case SigmaForm::scaled_identity: return "scaled_identity";
    case SigmaForm::rotating_ellipse: return "rotating_ellipse";
  }
  return "constant";
}

double number(const nlohmann::json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw SpecError(std::string("parameter '") + key + "' must be a number");
  return j.at(key).get<double>();
}

Eigen::VectorXd optional_vector(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) return {};
  return detail::vector_from_json(j.at(key), key);
}

}  // namespace

Eigen::MatrixXd VariableField::sigma(PointView x) const {
  const auto d = static_cast<Eigen::Index>(x.size());
  switch (form) {
    case SigmaForm::constant: return matrix;
    case SigmaForm::scaled_identity: {
      const double s = std::exp(log_scale + (log_scale_slope.size() ? dot(log_scale_slope, x) : 0.0));
      return s * Eigen::MatrixXd::Identity(d, d);
    }
    case SigmaForm::rotating_ellipse: {
      const double a = angle + (angle_slope.size() ? dot(angle_slope, x) : 0.0);
      Eigen::Matrix2d r;
      r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
      const Eigen::Vector2d diag(l1 * l1, l2 * l2);
      return r * diag.asDiagonal() * r.transpose();
    }
  }
  return matrix;
}

double VariableField::smoothness(PointView x) const {
  const double v = nu + (nu_slope.size() ? dot(nu_slope, x) : 0.0);
  if (!(v > 0.0)) throw DomainError("anisotropy field: smoothness is not positive at this location");
  return v;
}

void LocalAnisotropyField::validate(int m, int d) const {
  if (static_cast<int>(variables.size()) != m)
    throw ShapeError("anisotropy field: need one entry per variable");
  for (const auto& v : variables) {
    check_slope(v.log_scale_slope, d, "log_scale_slope");
    check_slope(v.angle_slope, d, "angle_slope");
    check_slope(v.nu_slope, d, "nu_slope");
    require(std::isfinite(v.nu), "anisotropy field: nu must be finite");
    switch (v.form) {
      case SigmaForm::constant: {
        if (v.matrix.rows() != d || v.matrix.cols() != d)
          throw ShapeError("anisotropy field: constant matrix must be d x d");
        Eigen::LLT<Eigen::MatrixXd> llt(v.matrix);
        require(detail::is_symmetric(v.matrix) && llt.info() == Eigen::Success,
                "anisotropy field: constant matrix must be symmetric positive definite");
        break;
      }
      case SigmaForm::scaled_identity:
        require(std::isfinite(v.log_scale), "anisotropy field: log_scale must be finite");
        break;
      case SigmaForm::rotating_ellipse:
        if (d != 2) throw ShapeError("anisotropy field: rotating_ellipse needs d = 2");
        require(v.l1 > 0.0 && v.l2 > 0.0, "anisotropy field: ellipse lengths must be positive");
        break;
    }
  }
}

nlohmann::json LocalAnisotropyField::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& v : variables) {
    nlohmann::json j{{"form", std::string(form_name(v.form))}, {"nu", v.nu}};
    if (v.nu_slope.size()) j["nu_slope"] = detail::vector_to_json(v.nu_slope);
    switch (v.form) {
      case SigmaForm::constant: j["matrix"] = detail::matrix_to_json(v.matrix); break;
      case SigmaForm::scaled_identity:
        j["log_scale"] = v.log_scale;
        if (v.log_scale_slope.size()) j["log_scale_slope"] = detail::vector_to_json(v.log_scale_slope);
        break;
      case SigmaForm::rotating_ellipse:
        j["angle"] = v.angle;
        if (v.angle_slope.size()) j["angle_slope"] = detail::vector_to_json(v.angle_slope);
        j["lengths"] = {v.l1, v.l2};
        break;
    }
    arr.push_back(std::move(j));
  }
  return arr;
}

LocalAnisotropyField LocalAnisotropyField::from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw SpecError("anisotropy field must be an array with one entry per variable");
  LocalAnisotropyField f;
  for (const auto& e : j) {
    if (!e.is_object()) throw SpecError("anisotropy field entries must be objects");
    VariableField v;
    const std::string form = e.value("form", std::string("scaled_identity"));
    if (form == "constant") {
      v.form = SigmaForm::constant;
      if (!e.contains("matrix")) throw SpecError("anisotropy field: constant form needs 'matrix'");
      v.matrix = detail::matrix_from_json(e["matrix"], "matrix");
    } else if (form == "scaled_identity") {
      v.form = SigmaForm::scaled_identity;
      v.log_scale = number(e, "log_scale", 0.0);
      v.log_scale_slope = optional_vector(e, "log_scale_slope");
    } else if (form == "rotating_ellipse") {
      v.form = SigmaForm::rotating_ellipse;
      v.angle = number(e, "angle", 0.0);
      v.angle_slope = optional_vector(e, "angle_slope");
      const Eigen::VectorXd l = e.contains("lengths") ? detail::vector_from_json(e["lengths"], "lengths")
                                                      : Eigen::VectorXd::Ones(2);
      if (l.size() != 2) throw SpecError("anisotropy field: 'lengths' needs two entries");
      v.l1 = l(0);
      v.l2 = l(1);
    } else {
      throw SpecError("anisotropy field: unknown form '" + form + "'");
    }
    v.nu = number(e, "nu", 1.0);
    v.nu_slope = optional_vector(e, "nu_slope");
    f.variables.push_back(std::move(v));
  }
  return f;
}

LocalAnisotropyField LocalAnisotropyField::identity(int m, int d, double nu) {
  LocalAnisotropyField f;
  for (int i = 0; i < m; ++i) {
    VariableField v;
    v.form = SigmaForm::constant;
    v.matrix = Eigen::MatrixXd::Identity(d, d);
    v.nu = nu;
    f.variables.push_back(std::move(v));
  }
  return f;
}

AnisotropyTerms anisotropy_terms(const Eigen::MatrixXd& si, const Eigen::MatrixXd& sj, PointView x,
                                 PointView y) {
  const Eigen::MatrixXd sij = 0.5 * (si + sj);
  Eigen::LLT<Eigen::MatrixXd> llt(sij);
  if (llt.info() != Eigen::Success)
    throw DomainError("anisotropy: (Sigma_i + Sigma_j) / 2 is not positive definite");
  Eigen::VectorXd h(static_cast<Eigen::Index>(x.size()));
  for (std::size_t c = 0; c < x.size(); ++c) h(static_cast<Eigen::Index>(c)) = x[c] - y[c];
  AnisotropyTerms out;
  out.quadratic_form = llt.matrixL().solve(h).squaredNorm();
  const double log_det_ij = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double log_det_i = std::log(si.determinant()), log_det_j = std::log(sj.determinant());
  out.prefactor = std::exp(0.25 * (log_det_i + log_det_j) - 0.5 * log_det_ij);
  return out;
}

double scaled_whittle_matern(double nu, double r) {
  if (!(nu > 0.0)) throw DomainError("Whittle-Matern: smoothness must be positive");
  const double limit = std::exp2(nu);
  if (r == 0.0) return limit;
  const BesselKResult k = bessel_k_checked(nu, r);
  if (k.overflow) return limit;
  // 2^nu M_nu(r) = 2 r^nu K_nu(r) / Gamma(nu)
  return 2.0 * std::exp(nu * std::log(r) - log_gamma(nu)) * k.value;
}

namespace {

class AskeyBetaNode final : public Node {
 public:
  AskeyBetaNode(const KernelSpec& gamma, double s, double nu)
      : Node("askey_beta", gamma.m(), gamma.domain(), {gamma}), s_(s), nu_(nu) {
    require(s_ > 0.0 && std::isfinite(s_), "askey_beta: support s must be positive");
    const double nu_min = 0.5 * (domain().total() + 1);
    if (!(nu_ >= nu_min)) {
      std::ostringstream os;
      os << "askey_beta: nu = " << nu_ << " is below (d + 1) / 2 = " << nu_min;
      throw SpecError(os.str());
    }
    claims_.positive_definite = gamma.claims().conditionally_negative_definite;
  }
  Block evaluate(PointView x, PointView y) const override {
    const double r = std::sqrt(detail::squared_distance(x, y)) / s_;
    if (r >= 1.0) return Block::Zero(m(), m());
    const Block g = children()[0].node().evaluate(x, y);
    Block out(m(), m());
    const double base = 1.0 - r;
    for (int i = 0; i < m(); ++i)
      for (int j = 0; j < m(); ++j) {
        double gij = g(i, j);
        if (gij < 0.0) {
          if (gij < -1e-12) throw DomainError("askey_beta: gamma must be non-negative");
          gij = 0.0;
        }
        out(i, j) = std::pow(s_, nu_ + 1.0) * beta(gij + 1.0, nu_ + 1.0) *
                    std::pow(base, nu_ + gij + 1.0);
      }
    return out;
  }
  nlohmann::json params() const override { return {{"s", s_}, {"nu", nu_}}; }
  bool stationary() const override { return false; }

 private:
  double s_, nu_;
};

class PaciorekNode final : public Node {
 public:
  PaciorekNode(LocalAnisotropyField field, const KernelSpec& gamma, Mixture1D mix)
      : Node("paciorek_mixture", gamma.m(), gamma.domain(), {gamma}),
        field_(std::move(field)),
        mix_(std::move(mix)) {
    field_.validate(m(), domain().total());
    mix_.validate(1);
    for (const auto& n : mix_.nodes)
      if (n.density.size() != 0) throw SpecError("paciorek_mixture: mixture must be scalar");
    claims_.positive_definite = gamma.claims().conditionally_negative_definite;
  }
  Block evaluate(PointView x, PointView y) const override {
    const Block g = children()[0].node().evaluate(x, y);
    Block out(m(), m());
    for (int i = 0; i < m(); ++i) {
      const Eigen::MatrixXd si = field_.variables[i].sigma(x);
      for (int j = 0; j < m(); ++j) {
        const AnisotropyTerms a = anisotropy_terms(si, field_.variables[j].sigma(y), x, y);
        double acc = 0.0;
        for (const auto& n : mix_.nodes) acc += n.weight * std::exp(-n.t * (a.quadratic_form + g(i, j)));
        out(i, j) = a.prefactor * acc;
      }
    }
    return out;
  }
  nlohmann::json params() const override {
    return {{"field", field_.to_json()}, {"mixture", mix_.to_json()}};
  }
  bool stationary() const override { return false; }

 private:
  LocalAnisotropyField field_;
  Mixture1D mix_;
};

class NonstationaryMaternNode final : public Node {
 public:
  NonstationaryMaternNode(LocalAnisotropyField field, const KernelSpec& g, bool gamma_factor)
      : Node("nonstationary_matern", g.m(), g.domain(), {g}),
        field_(std::move(field)),
        gamma_factor_(gamma_factor) {
    field_.validate(m(), domain().total());
    bool constant_nu = true;
    for (const auto& v : field_.variables) constant_nu &= v.constant_smoothness();
    // The mixture argument needs a CND G; the displayed normalisation is an
    // exact mixture only up to Gamma(nubar), which is constant when nu is.
    claims_.positive_definite =
        g.claims().conditionally_negative_definite && (gamma_factor_ || constant_nu);
  }
  Block evaluate(PointView x, PointView y) const override {
    const Block g = children()[0].node().evaluate(x, y);
    Block out(m(), m());
    for (int i = 0; i < m(); ++i) {
      const Eigen::MatrixXd si = field_.variables[i].sigma(x);
      const double nu_i = field_.variables[i].smoothness(x);
      for (int j = 0; j < m(); ++j) {
        if (g(i, j) < 0.0) throw DomainError("nonstationary_matern: G must be non-negative");
        const AnisotropyTerms a = anisotropy_terms(si, field_.variables[j].sigma(y), x, y);
        const double nubar = 0.5 * (nu_i + field_.variables[j].smoothness(y));
        double v = a.prefactor * scaled_whittle_matern(nubar, std::sqrt(a.quadratic_form + g(i, j)));
        if (gamma_factor_) v *= std::tgamma(nubar);
        out(i, j) = v;
      }
    }
    return out;
  }
  nlohmann::json params() const override {
    nlohmann::json j{{"field", field_.to_json()}};
    if (gamma_factor_) j["gamma_factor"] = true;
    return j;
  }
  bool stationary() const override { return false; }

 private:
  LocalAnisotropyField field_;
  bool gamma_factor_;
};

}  // namespace

KernelSpec askey_beta(const KernelSpec& gamma, double s, double nu) {
  return KernelSpec(std::make_shared<AskeyBetaNode>(gamma, s, nu));
}

KernelSpec paciorek_mixture(const LocalAnisotropyField& field, const KernelSpec& gamma,
                            const Mixture1D& mix) {
  return KernelSpec(std::make_shared<PaciorekNode>(field, gamma, mix));
}

KernelSpec nonstationary_matern(const LocalAnisotropyField& field, const KernelSpec& g,
                                bool gamma_factor) {
  return KernelSpec(std::make_shared<NonstationaryMaternNode>(field, g, gamma_factor));
}

}  // namespace covkit
