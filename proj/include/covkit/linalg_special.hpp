#pragma once

#include <Eigen/Dense>

namespace covkit {

/// Dense real symmetric matrix. Entries are symmetrized on construction so
/// that (i,j) and (j,i) agree bit for bit.
class SymMatrix {
 public:
  explicit SymMatrix(int order);
  explicit SymMatrix(const Eigen::MatrixXd& m);

  int order() const noexcept { return static_cast<int>(data_.rows()); }
  double operator()(int i, int j) const { return data_(i, j); }
  const Eigen::MatrixXd& matrix() const noexcept { return data_; }

  /// Writes both (i,j) and (j,i).
  void set(int i, int j, double v);

  SymMatrix shifted(double c) const;

 private:
  Eigen::MatrixXd data_;
};

struct EigenResult {
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
  double max_abs_eigenvalue = 0.0;
};

/// Extreme eigenvalues of a symmetric matrix. Throws InputError on
/// non-finite entries.
EigenResult min_eigenvalue(const SymMatrix& m);

/// Smallest eigenvalue together with a unit eigenvector.
struct EigenPair {
  double value = 0.0;
  Eigen::VectorXd vector;
};
EigenPair extreme_eigenpair(const SymMatrix& m, bool largest);

struct JitterSchedule {
  double start = 0.0;  // 0 selects 1e-10 * trace/order
  double growth = 10.0;
  int max_tries = 8;
};

struct CholeskyResult {
  Eigen::MatrixXd lower;
  double jitter = 0.0;
};

/// Lower factor of M + j*I for the smallest j in {0, s, s*g, ...}. Throws
/// NotPsdError (carrying the minimum eigenvalue) once max_tries jittered
/// attempts have failed.
CholeskyResult cholesky_jittered(const SymMatrix& m,
                                 const JitterSchedule& schedule = {});

struct BesselKResult {
  double value = 0.0;
  bool underflow = false;  // true when K_nu(x) is below the double range
  bool overflow = false;
};

/// Modified Bessel function of the second kind K_nu(x), x > 0. K is even in
/// nu, so negative orders are reflected.
BesselKResult bessel_k_checked(double nu, double x);
double bessel_k(double nu, double x);

/// Principal value of the exponential integral Ei(x), x != 0.
double exp_integral_ei(double x);

double log_gamma(double x);
double beta(double a, double b);

}  // namespace covkit
