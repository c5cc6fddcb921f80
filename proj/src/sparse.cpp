#include "dlsfem/sparse.hpp"

#include "dlsfem/error.hpp"
#include "dlsfem/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>

namespace dlsfem {

BlockSparseMatrix::BlockSparseMatrix(int block_rows, const std::vector<std::vector<int>>& columns)
    : block_rows_(block_rows) {
  if (static_cast<int>(columns.size()) != block_rows) throw ValidationError("block matrix: pattern size mismatch");
  row_begin_.resize(block_rows + 1, 0);
  for (int i = 0; i < block_rows; ++i) row_begin_[i + 1] = row_begin_[i] + static_cast<std::int64_t>(columns[i].size());
  col_index_.reserve(row_begin_.back());
  for (const auto& row : columns) col_index_.insert(col_index_.end(), row.begin(), row.end());
  values_.assign(static_cast<std::size_t>(row_begin_.back()) * block_entries, 0.0);
}

std::int64_t BlockSparseMatrix::find(int row, int col) const {
  const auto first = col_index_.begin() + row_begin_[row];
  const auto last = col_index_.begin() + row_begin_[row + 1];
  const auto it = std::lower_bound(first, last, col);
  if (it == last || *it != col) return -1;
  return it - col_index_.begin();
}

double BlockSparseMatrix::coeff(int row, int col) const {
  const auto idx = find(row / block, col / block);
  if (idx < 0) return 0.0;
  return block_data(idx)[(row % block) * block + col % block];
}

void BlockSparseMatrix::set_zero() { std::fill(values_.begin(), values_.end(), 0.0); }

void BlockSparseMatrix::multiply(const Eigen::VectorXd& x, Eigen::VectorXd& y, int threads) const {
  y.resize(rows());
  parallel_chunks(block_rows_, threads, [&](int, int begin, int end) {
    for (int i = begin; i < end; ++i) {
      double acc[block] = {0.0, 0.0, 0.0, 0.0, 0.0};
      for (auto k = row_begin_[i]; k < row_begin_[i + 1]; ++k) {
        const double* a = block_data(k);
        const double* xs = x.data() + static_cast<std::ptrdiff_t>(col_index_[k]) * block;
        for (int r = 0; r < block; ++r) {
          const double* ar = a + r * block;
          acc[r] += ar[0] * xs[0] + ar[1] * xs[1] + ar[2] * xs[2] + ar[3] * xs[3] + ar[4] * xs[4];
        }
      }
      for (int r = 0; r < block; ++r) y[i * block + r] = acc[r];
    }
  });
}

Eigen::VectorXd BlockSparseMatrix::diagonal() const {
  Eigen::VectorXd d = Eigen::VectorXd::Zero(rows());
  for (int i = 0; i < block_rows_; ++i) {
    const auto idx = find(i, i);
    if (idx < 0) continue;
    for (int r = 0; r < block; ++r) d[i * block + r] = block_data(idx)[r * block + r];
  }
  return d;
}

double BlockSparseMatrix::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double BlockSparseMatrix::max_asymmetry() const {
  double m = 0.0;
  for (int i = 0; i < block_rows_; ++i) {
    for (auto k = row_begin_[i]; k < row_begin_[i + 1]; ++k) {
      const int j = col_index_[k];
      if (j < i) continue;
      const double* a = block_data(k);
      const auto t = find(j, i);
      for (int r = 0; r < block; ++r)
        for (int c = 0; c < block; ++c) {
          const double mirror = t < 0 ? 0.0 : block_data(t)[c * block + r];
          m = std::max(m, std::abs(a[r * block + c] - mirror));
        }
    }
  }
  return m;
}

Eigen::SparseMatrix<double> BlockSparseMatrix::to_sparse() const {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(values_.size());
  for (int i = 0; i < block_rows_; ++i)
    for (auto k = row_begin_[i]; k < row_begin_[i + 1]; ++k) {
      const double* a = block_data(k);
      for (int r = 0; r < block; ++r)
        for (int c = 0; c < block; ++c)
          if (a[r * block + c] != 0.0) triplets.emplace_back(i * block + r, col_index_[k] * block + c, a[r * block + c]);
    }
  Eigen::SparseMatrix<double> s(rows(), rows());
  s.setFromTriplets(triplets.begin(), triplets.end());
  return s;
}

void BlockSparseMatrix::write_coordinate(std::ostream& out) const {
  out << std::setprecision(17);
  for (int i = 0; i < block_rows_; ++i)
    for (auto k = row_begin_[i]; k < row_begin_[i + 1]; ++k) {
      const double* a = block_data(k);
      for (int r = 0; r < block; ++r)
        for (int c = 0; c < block; ++c)
          if (a[r * block + c] != 0.0) out << i * block + r << ' ' << col_index_[k] * block + c << ' ' << a[r * block + c] << '\n';
    }
}

}  // namespace dlsfem
