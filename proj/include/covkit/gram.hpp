#pragma once

#include "covkit/kernel.hpp"
#include "covkit/linalg_special.hpp"

namespace covkit {

/// Symmetric (n m) x (n m) Gram matrix; entry (i m + p, j m + q) holds
/// K_pq(x_i, x_j).
class BlockMatrix {
 public:
  BlockMatrix(int n, int m, SymMatrix data);

  int n() const noexcept { return n_; }
  int m() const noexcept { return m_; }
  const SymMatrix& data() const noexcept { return data_; }
  const Eigen::MatrixXd& matrix() const noexcept { return data_.matrix(); }
  double operator()(int i, int p, int j, int q) const {
    return data_(i * m_ + p, j * m_ + q);
  }

 private:
  int n_;
  int m_;
  SymMatrix data_;
};

/// Assembles the Gram matrix with blocks computed in parallel (OpenMP). Entry
/// (i,p),(j,q) is the average of K_pq(x_i, x_j) and K_qp(x_j, x_i).
BlockMatrix assemble_gram(const KernelSpec& spec, const PointSet& pts);

/// Single-threaded reference implementation with identical results.
BlockMatrix assemble_gram_serial(const KernelSpec& spec, const PointSet& pts);

}  // namespace covkit
