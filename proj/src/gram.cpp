#include "covkit/gram.hpp"

#include <exception>
#include <string>

#include "covkit/errors.hpp"

namespace covkit {

BlockMatrix::BlockMatrix(int n, int m, SymMatrix data) : n_(n), m_(m), data_(std::move(data)) {
  if (data_.order() != n_ * m_) throw ShapeError("BlockMatrix: order must be n * m");
}

namespace {

void check_dims(const KernelSpec& spec, const PointSet& pts) {
  if (!(spec.domain() == pts.domain()))
    throw ShapeError("assemble_gram: point dimension (" + std::to_string(pts.domain().space) +
                     ", " + std::to_string(pts.domain().time) + ") does not match the kernel");
}

// Fills blocks (i, j) and (j, i) for i <= j.
void fill_pair(const KernelSpec& spec, const PointSet& pts, std::size_t i, std::size_t j,
               Eigen::MatrixXd& g) {
  const int m = spec.m();
  const auto r = static_cast<Eigen::Index>(i) * m;
  const auto c = static_cast<Eigen::Index>(j) * m;
  try {
    const Block kxy = spec.evaluate(pts[i], pts[j]);
    const Block kyx = i == j ? kxy : spec.evaluate(pts[j], pts[i]);
    const Block b = 0.5 * (kxy + kyx.transpose());
    g.block(r, c, m, m) = b;
    g.block(c, r, m, m) = b.transpose();
  } catch (const Error& e) {
    throw EvaluationError(std::string(e.what()) + " (point pair " + std::to_string(i) + ", " +
                          std::to_string(j) + ")");
  }
}

}  // namespace

BlockMatrix assemble_gram(const KernelSpec& spec, const PointSet& pts) {
  check_dims(spec, pts);
  const auto n = static_cast<long>(pts.size());
  const int m = spec.m();
  Eigen::MatrixXd g(n * m, n * m);
  std::exception_ptr failure;

#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    for (long j = i; j < n; ++j) {
      try {
        fill_pair(spec, pts, static_cast<std::size_t>(i), static_cast<std::size_t>(j), g);
      } catch (...) {
#pragma omp critical(covkit_gram_failure)
        if (!failure) failure = std::current_exception();
      }
    }
  }
  if (failure) std::rethrow_exception(failure);
  return BlockMatrix(static_cast<int>(n), m, SymMatrix(g));
}

BlockMatrix assemble_gram_serial(const KernelSpec& spec, const PointSet& pts) {
  check_dims(spec, pts);
  const std::size_t n = pts.size();
  const int m = spec.m();
  const auto order = static_cast<Eigen::Index>(n) * m;
  Eigen::MatrixXd g(order, order);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) fill_pair(spec, pts, i, j, g);
  return BlockMatrix(static_cast<int>(n), m, SymMatrix(g));
}

}  // namespace covkit
