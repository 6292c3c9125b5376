#include "covkit/linalg_special.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "covkit/errors.hpp"

namespace covkit {

namespace {

void require_finite(const Eigen::MatrixXd& m) {
  if (!m.allFinite()) throw InputError("matrix has non-finite entries");
}

}  // namespace

SymMatrix::SymMatrix(int order) : data_(Eigen::MatrixXd::Zero(order, order)) {
  if (order < 1) throw ShapeError("SymMatrix order must be >= 1");
}

SymMatrix::SymMatrix(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols() || m.rows() < 1)
    throw ShapeError("SymMatrix needs a non-empty square matrix");
  data_ = 0.5 * (m + m.transpose());
}

void SymMatrix::set(int i, int j, double v) {
  data_(i, j) = v;
  data_(j, i) = v;
}

SymMatrix SymMatrix::shifted(double c) const {
  SymMatrix out(*this);
  out.data_.diagonal().array() += c;
  return out;
}

EigenResult min_eigenvalue(const SymMatrix& m) {
  require_finite(m.matrix());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m.matrix(),
                                                         Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw InputError("symmetric eigensolver did not converge");
  const auto& ev = solver.eigenvalues();  // ascending
  EigenResult r;
  r.min_eigenvalue = ev(0);
  r.max_eigenvalue = ev(ev.size() - 1);
  r.max_abs_eigenvalue = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
  return r;
}

EigenPair extreme_eigenpair(const SymMatrix& m, bool largest) {
  require_finite(m.matrix());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m.matrix());
  if (solver.info() != Eigen::Success)
    throw InputError("symmetric eigensolver did not converge");
  const Eigen::Index k = largest ? solver.eigenvalues().size() - 1 : 0;
  return {solver.eigenvalues()(k), solver.eigenvectors().col(k)};
}

CholeskyResult cholesky_jittered(const SymMatrix& m, const JitterSchedule& schedule) {
  require_finite(m.matrix());
  if (schedule.start < 0.0) throw InputError("jitter start must be positive");
  if (schedule.growth <= 1.0) throw InputError("jitter growth must exceed 1");
  const int n = m.order();
  double start = schedule.start;
  if (start == 0.0) {
    const double mean_diag = m.matrix().trace() / n;
    start = 1e-10 * (mean_diag > 0.0 ? mean_diag : 1.0);
  }

  double jitter = 0.0;
  for (int attempt = 0; attempt <= schedule.max_tries; ++attempt) {
    Eigen::MatrixXd a = m.matrix();
    a.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success) {
      return {llt.matrixL(), jitter};
    }
    jitter = attempt == 0 ? start : jitter * schedule.growth;
  }
  const double lmin = min_eigenvalue(m).min_eigenvalue;
  throw NotPsdError("matrix is not positive semidefinite (min eigenvalue " +
                        std::to_string(lmin) + ") after " +
                        std::to_string(schedule.max_tries) + " jitter attempts",
                    lmin);
}

BesselKResult bessel_k_checked(double nu, double x) {
  if (!std::isfinite(nu) || std::isnan(x))
    throw DomainError("bessel_k: non-finite argument");
  if (x <= 0.0) throw DomainError("bessel_k: x must be positive");
  nu = std::abs(nu);
  BesselKResult r;
  if (x > 745.0) {  // e^{-x} alone is below the smallest subnormal
    r.underflow = true;
    return r;
  }
  r.value = std::cyl_bessel_k(nu, x);
  if (std::isinf(r.value)) {
    r.overflow = true;
  } else if (r.value < std::numeric_limits<double>::min()) {
    r.underflow = true;
    r.value = 0.0;
  }
  return r;
}

double bessel_k(double nu, double x) { return bessel_k_checked(nu, x).value; }

namespace {

constexpr double kEulerGamma = 0.57721566490153286061;

// E1(z) for z > 0.
double exp_integral_e1(double z) {
  const double eps = std::numeric_limits<double>::epsilon();
  if (z <= 1.0) {
    // -gamma - ln z - sum_{k>=1} (-z)^k / (k k!)
    double sum = 0.0;
    double term = 1.0;
    for (int k = 1; k < 200; ++k) {
      term *= -z / k;
      const double add = term / k;
      sum += add;
      if (std::abs(add) < eps * std::abs(sum)) break;
    }
    return -kEulerGamma - std::log(z) - sum;
  }
  // Modified Lentz evaluation of the continued fraction.
  const double tiny = 1e-300;
  double b = z + 1.0;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -static_cast<double>(i) * i;
    b += 2.0;
    d = 1.0 / (an * d + b);
    c = b + an / c;
    const double del = c * d;
    h *= del;
    if (std::abs(del - 1.0) < eps) break;
  }
  return h * std::exp(-z);
}

}  // namespace

double exp_integral_ei(double x) {
  if (std::isnan(x)) throw DomainError("exp_integral_ei: NaN argument");
  if (x == 0.0) throw DomainError("exp_integral_ei: logarithmic singularity at 0");
  if (x < 0.0) return -exp_integral_e1(-x);

  const double eps = std::numeric_limits<double>::epsilon();
  if (x < 40.0) {
    double sum = 0.0;
    double term = 1.0;
    for (int k = 1; k < 500; ++k) {
      term *= x / k;
      const double add = term / k;
      sum += add;
      if (add < eps * sum) break;
    }
    return kEulerGamma + std::log(x) + sum;
  }
  // Asymptotic series, truncated at its smallest term.
  double sum = 1.0;
  double term = 1.0;
  for (int k = 1; k < 100; ++k) {
    const double next = term * k / x;
    if (next > term) break;
    term = next;
    sum += term;
    if (term < eps * sum) break;
  }
  return std::exp(x) / x * sum;
}

double log_gamma(double x) {
  if (!(x > 0.0) || !std::isfinite(x))
    throw DomainError("log_gamma: argument must be positive and finite");
  return std::lgamma(x);
}

double beta(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b))
    throw DomainError("beta: arguments must be positive and finite");
  if (a + b < 170.0) return std::tgamma(a) * std::tgamma(b) / std::tgamma(a + b);
  return std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
}

}  // namespace covkit
