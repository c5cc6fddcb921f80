#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cstdint>
#include <ostream>
#include <vector>

namespace dlsfem {

/// Unknowns per element: (sigma_xx, sigma_xy, sigma_yy, u_x, u_y).
inline constexpr int kFieldsPerElement = 5;

enum Field : int { sigma_xx = 0, sigma_xy = 1, sigma_yy = 2, u_x = 3, u_y = 4 };

/// Element-major layout: field c of element e lives at 5 e + c.
class DofMap {
 public:
  DofMap() = default;
  explicit DofMap(int num_elements) : num_elements_(num_elements) {}
  int num_elements() const noexcept { return num_elements_; }
  int num_dofs() const noexcept { return kFieldsPerElement * num_elements_; }
  int index(int element, int field) const noexcept { return kFieldsPerElement * element + field; }
  int element_of(int dof) const noexcept { return dof / kFieldsPerElement; }
  int field_of(int dof) const noexcept { return dof % kFieldsPerElement; }

 private:
  int num_elements_ = 0;
};

/// Block-row compressed matrix with dense 5x5 blocks, one block per coupled element pair.
/// Full (not triangular) storage; block values are row-major.
class BlockSparseMatrix {
 public:
  static constexpr int block = kFieldsPerElement;
  static constexpr int block_entries = block * block;

  BlockSparseMatrix() = default;
  /// `columns[i]` lists the block columns of block row i (sorted, unique).
  BlockSparseMatrix(int block_rows, const std::vector<std::vector<int>>& columns);

  int block_rows() const noexcept { return block_rows_; }
  int rows() const noexcept { return block * block_rows_; }
  std::int64_t nonzero_blocks() const noexcept { return static_cast<std::int64_t>(col_index_.size()); }

  /// Index of block (row, col) or -1 when outside the pattern.
  std::int64_t find(int row, int col) const;
  double* block_data(std::int64_t index) { return values_.data() + index * block_entries; }
  const double* block_data(std::int64_t index) const { return values_.data() + index * block_entries; }
  std::vector<double>& values() noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }
  const std::vector<std::int64_t>& row_begin() const noexcept { return row_begin_; }
  const std::vector<int>& column_index() const noexcept { return col_index_; }

  double coeff(int row, int col) const;
  void set_zero();

  /// y = A x.
  void multiply(const Eigen::VectorXd& x, Eigen::VectorXd& y, int threads = 1) const;
  Eigen::VectorXd diagonal() const;
  double max_abs() const;
  /// max |A_ij - A_ji|.
  double max_asymmetry() const;

  Eigen::SparseMatrix<double> to_sparse() const;
  /// One "row col value" line per stored nonzero (0-based indices).
  void write_coordinate(std::ostream& out) const;

 private:
  int block_rows_ = 0;
  std::vector<std::int64_t> row_begin_;
  std::vector<int> col_index_;
  std::vector<double> values_;
};

}  // namespace dlsfem
