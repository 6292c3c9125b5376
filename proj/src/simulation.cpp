#include "covkit/simulation.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "covkit/errors.hpp"
#include "covkit/gram.hpp"
#include "covkit/linalg_special.hpp"

namespace covkit {

namespace {

// Neumaier compensated sum.
struct Accumulator {
  double sum = 0.0, comp = 0.0;
  void add(double v) {
    const double t = sum + v;
    comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

}  // namespace

std::vector<Realization> sample_gaussian(const KernelSpec& spec, const PointSet& pts, int n_real,
                                         std::uint64_t seed, bool force) {
  if (n_real < 0) throw InputError("sample_gaussian: number of realizations must be non-negative");
  if (pts.domain() != spec.domain()) throw ShapeError("sample_gaussian: point set domain does not match the model");
  const int n = static_cast<int>(pts.size()), m = spec.m();
  const BlockMatrix g = assemble_gram(spec, pts);
  if (!force) {
    const EigenResult e = min_eigenvalue(g.data());
    if (e.min_eigenvalue < -1e-8 * e.max_abs_eigenvalue) {
      std::ostringstream os;
      os.precision(17);
      os << "sample_gaussian: Gram matrix is not positive semidefinite (min eigenvalue " << e.min_eigenvalue
         << ", max |eigenvalue| " << e.max_abs_eigenvalue << ")";
      throw NotPsdError(os.str(), e.min_eigenvalue);
    }
  }
  const CholeskyResult chol = cholesky_jittered(g.data());

  std::vector<Realization> out(static_cast<std::size_t>(n_real));
#pragma omp parallel for schedule(static)
  for (int r = 0; r < n_real; ++r) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(static_cast<std::uint64_t>(r) >> 32)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal;
    Eigen::VectorXd z(n * m);
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
    const Eigen::VectorXd v = chol.lower * z;
    Realization& re = out[static_cast<std::size_t>(r)];
    re.points = pts.points();
    re.values.resize(n, m);
    for (int i = 0; i < n; ++i)
      for (int p = 0; p < m; ++p) re.values(i, p) = v(i * m + p);
    re.seed = seed;
    re.index = static_cast<std::uint64_t>(r);
    re.jitter_applied = chol.jitter;
  }
  return out;
}

EmpiricalPcv empirical_pcv(const std::vector<Realization>& reals, const std::vector<Eigen::VectorXd>& lags,
                           double radius, int batches) {
  EmpiricalPcv out;
  out.lags = lags;
  if (reals.empty()) throw InputError("empirical_pcv: no realizations");
  const auto& pts = reals.front().points;
  const Eigen::Index m = reals.front().values.cols();
  for (const auto& r : reals)
    if (r.points.size() != pts.size() || r.values.cols() != m || r.values.rows() != static_cast<Eigen::Index>(pts.size()))
      throw ShapeError("empirical_pcv: realizations do not share one location set");
  const std::size_t dim = pts.empty() ? 0 : pts.front().size();
  const int n_real = static_cast<int>(reals.size());
  if (batches <= 0) batches = std::min(n_real, 20);
  batches = std::min(batches, n_real);
  const double nan = std::numeric_limits<double>::quiet_NaN();

  for (const auto& h : lags) {
    if (static_cast<std::size_t>(h.size()) != dim) throw ShapeError("empirical_pcv: lag dimension mismatch");
    std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (a, b) with x_a - x_b = h
    for (std::size_t a = 0; a < pts.size(); ++a)
      for (std::size_t b = 0; b < pts.size(); ++b) {
        bool match = true;
        for (std::size_t c = 0; c < dim && match; ++c)
          match = std::abs(pts[a][c] - pts[b][c] - h(static_cast<Eigen::Index>(c))) <= radius;
        if (match) pairs.emplace_back(a, b);
      }
    out.counts.push_back(static_cast<long>(pairs.size()));
    if (pairs.empty()) {
      out.estimates.push_back(Eigen::MatrixXd::Constant(m, m, nan));
      out.std_errors.push_back(Eigen::MatrixXd::Constant(m, m, nan));
      continue;
    }
    Eigen::MatrixXd est(m, m), se(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
      for (Eigen::Index j = 0; j < m; ++j) {
        std::vector<Accumulator> per_batch(static_cast<std::size_t>(batches));
        std::vector<long> per_count(static_cast<std::size_t>(batches), 0);
        for (int r = 0; r < n_real; ++r) {
          const auto b = static_cast<std::size_t>(static_cast<long>(r) * batches / n_real);
          const Eigen::MatrixXd& z = reals[static_cast<std::size_t>(r)].values;
          for (const auto& [pa, pb] : pairs) {
            const double d = z(static_cast<Eigen::Index>(pa), i) - z(static_cast<Eigen::Index>(pb), j);
            per_batch[b].add(d * d);
          }
          per_count[b] += static_cast<long>(pairs.size());
        }
        Accumulator total;
        long total_count = 0;
        std::vector<double> means(static_cast<std::size_t>(batches));
        for (int b = 0; b < batches; ++b) {
          total.add(per_batch[static_cast<std::size_t>(b)].value());
          total_count += per_count[static_cast<std::size_t>(b)];
          means[static_cast<std::size_t>(b)] =
              per_batch[static_cast<std::size_t>(b)].value() / (2.0 * per_count[static_cast<std::size_t>(b)]);
        }
        est(i, j) = total.value() / (2.0 * total_count);
        if (batches < 2) {
          se(i, j) = nan;
        } else {
          double mean = 0.0, var = 0.0;
          for (double v : means) mean += v;
          mean /= batches;
          for (double v : means) var += (v - mean) * (v - mean);
          var /= batches - 1;
          se(i, j) = std::sqrt(var / batches);
        }
      }
    out.estimates.push_back(est);
    out.std_errors.push_back(se);
  }
  return out;
}

Eigen::MatrixXd theoretical_pcv(const KernelSpec& spec, const Eigen::VectorXd& lag) {
  if (lag.size() != spec.domain().total()) throw ShapeError("theoretical_pcv: lag dimension mismatch");
  const Point zero(static_cast<std::size_t>(lag.size()), 0.0);
  const Point h(lag.data(), lag.data() + lag.size());
  const Block c0 = spec.evaluate(zero, zero);
  const Block ch = spec.evaluate(h, zero);
  Eigen::MatrixXd out(spec.m(), spec.m());
  for (int i = 0; i < spec.m(); ++i)
    for (int j = 0; j < spec.m(); ++j) out(i, j) = 0.5 * (c0(i, i) + c0(j, j)) - ch(i, j);
  return out;
}

}  // namespace covkit
