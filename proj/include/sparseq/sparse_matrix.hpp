#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <span>
#include <tuple>
#include <utility>
#include <vector>

#include "sparseq/errors.hpp"

namespace sparseq {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// Compressed-sparse-column matrix. Row indices within each column are kept
// strictly ascending; duplicates are rejected at construction. Explicitly
// stored zeros are permitted (a column of explicit zeros is still "stored").
class SparseColumnMatrix {
 public:
  SparseColumnMatrix() : rows_(0), cols_(0), col_ptr_{0} {}

  SparseColumnMatrix(Index rows, Index cols, std::vector<Index> col_ptr,
                     std::vector<Index> row_idx, std::vector<double> values)
      : rows_(rows),
        cols_(cols),
        col_ptr_(std::move(col_ptr)),
        row_idx_(std::move(row_idx)),
        values_(std::move(values)) {
    validate();
  }

  // Assembles from (row, col, value) triplets; entries are sorted internally.
  static SparseColumnMatrix from_triplets(
      Index rows, Index cols,
      std::vector<std::tuple<Index, Index, double>> triplets) {
    std::sort(triplets.begin(), triplets.end(),
              [](const auto& a, const auto& b) {
                return std::tie(std::get<1>(a), std::get<0>(a)) <
                       std::tie(std::get<1>(b), std::get<0>(b));
              });
    std::vector<Index> col_ptr(static_cast<std::size_t>(cols) + 1, 0);
    std::vector<Index> row_idx;
    std::vector<double> values;
    row_idx.reserve(triplets.size());
    values.reserve(triplets.size());
    for (const auto& [r, c, v] : triplets) {
      if (c < 0 || c >= cols) throw DimensionMismatch("triplet column out of range");
      ++col_ptr[static_cast<std::size_t>(c) + 1];
      row_idx.push_back(r);
      values.push_back(v);
    }
    for (std::size_t j = 1; j < col_ptr.size(); ++j) col_ptr[j] += col_ptr[j - 1];
    return SparseColumnMatrix(rows, cols, std::move(col_ptr), std::move(row_idx),
                              std::move(values));
  }

  // Stores every entry of a dense matrix, including zeros. Mostly a test and
  // fixture convenience; products then match dense arithmetic term for term.
  static SparseColumnMatrix from_dense(const Matrix& a) {
    std::vector<Index> col_ptr(static_cast<std::size_t>(a.cols()) + 1, 0);
    std::vector<Index> row_idx;
    std::vector<double> values;
    row_idx.reserve(static_cast<std::size_t>(a.size()));
    values.reserve(static_cast<std::size_t>(a.size()));
    for (Index j = 0; j < a.cols(); ++j) {
      col_ptr[static_cast<std::size_t>(j) + 1] =
          col_ptr[static_cast<std::size_t>(j)] + a.rows();
      for (Index i = 0; i < a.rows(); ++i) {
        row_idx.push_back(i);
        values.push_back(a(i, j));
      }
    }
    return SparseColumnMatrix(a.rows(), a.cols(), std::move(col_ptr),
                              std::move(row_idx), std::move(values));
  }

  static SparseColumnMatrix identity(Index n) {
    std::vector<Index> col_ptr(static_cast<std::size_t>(n) + 1);
    std::vector<Index> row_idx(static_cast<std::size_t>(n));
    std::vector<double> values(static_cast<std::size_t>(n), 1.0);
    for (Index j = 0; j <= n; ++j) col_ptr[static_cast<std::size_t>(j)] = j;
    for (Index j = 0; j < n; ++j) row_idx[static_cast<std::size_t>(j)] = j;
    return SparseColumnMatrix(n, n, std::move(col_ptr), std::move(row_idx),
                              std::move(values));
  }

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index nonzeros() const { return static_cast<Index>(values_.size()); }

  std::span<const Index> column_rows(Index j) const {
    check_col(j);
    return {row_idx_.data() + col_ptr_[static_cast<std::size_t>(j)],
            static_cast<std::size_t>(column_size(j))};
  }

  std::span<const double> column_values(Index j) const {
    check_col(j);
    return {values_.data() + col_ptr_[static_cast<std::size_t>(j)],
            static_cast<std::size_t>(column_size(j))};
  }

  Index column_size(Index j) const {
    check_col(j);
    return col_ptr_[static_cast<std::size_t>(j) + 1] -
           col_ptr_[static_cast<std::size_t>(j)];
  }

  // y = A x. Zero coefficients are skipped so that the sum visits exactly the
  // columns a support-restricted product would, in the same order.
  Vector multiply(const Vector& x) const {
    if (x.size() != cols_) throw DimensionMismatch("multiply: x has wrong size");
    Vector y = Vector::Zero(rows_);
    for (Index j = 0; j < cols_; ++j) {
      const double xj = x[j];
      if (xj == 0.0) continue;
      add_scaled_column(j, xj, y);
    }
    return y;
  }

  // y = A^T w.
  Vector multiply_transpose(const Vector& w) const {
    if (w.size() != rows_) throw DimensionMismatch("multiply_transpose: w has wrong size");
    Vector y(cols_);
    for (Index j = 0; j < cols_; ++j) y[j] = column_dot(j, w);
    return y;
  }

  // acc += s * A(:, j)
  void add_scaled_column(Index j, double s, Vector& acc) const {
    const auto rows = column_rows(j);
    const auto vals = column_values(j);
    for (std::size_t t = 0; t < rows.size(); ++t) acc[rows[t]] += s * vals[t];
  }

  double column_dot(Index j, const Vector& w) const {
    const auto rows = column_rows(j);
    const auto vals = column_values(j);
    double acc = 0.0;
    for (std::size_t t = 0; t < rows.size(); ++t) acc += vals[t] * w[rows[t]];
    return acc;
  }

  double column_norm1(Index j) const {
    double acc = 0.0;
    for (double v : column_values(j)) acc += std::abs(v);
    return acc;
  }

  bool all_zero() const {
    return std::all_of(values_.begin(), values_.end(),
                       [](double v) { return v == 0.0; });
  }

  Matrix to_dense() const {
    Matrix a = Matrix::Zero(rows_, cols_);
    for (Index j = 0; j < cols_; ++j) {
      const auto rows = column_rows(j);
      const auto vals = column_values(j);
      for (std::size_t t = 0; t < rows.size(); ++t) a(rows[t], j) = vals[t];
    }
    return a;
  }

 private:
  void check_col(Index j) const {
    if (j < 0 || j >= cols_) throw DimensionMismatch("column index out of range");
  }

  void validate() const {
    if (rows_ < 0 || cols_ < 0) throw InvalidParameter("negative dimension");
    if (col_ptr_.size() != static_cast<std::size_t>(cols_) + 1)
      throw InvalidParameter("col_ptr has wrong length");
    if (col_ptr_.front() != 0 ||
        col_ptr_.back() != static_cast<Index>(row_idx_.size()))
      throw InvalidParameter("col_ptr endpoints are inconsistent");
    if (row_idx_.size() != values_.size())
      throw InvalidParameter("row index / value length mismatch");
    for (std::size_t j = 0; j + 1 < col_ptr_.size(); ++j) {
      if (col_ptr_[j] > col_ptr_[j + 1])
        throw InvalidParameter("col_ptr must be nondecreasing");
      for (Index t = col_ptr_[j]; t < col_ptr_[j + 1]; ++t) {
        const Index r = row_idx_[static_cast<std::size_t>(t)];
        if (r < 0 || r >= rows_) throw InvalidParameter("row index out of range");
        if (t > col_ptr_[j] && row_idx_[static_cast<std::size_t>(t - 1)] >= r)
          throw InvalidParameter("row indices must be strictly ascending per column");
      }
    }
  }

  Index rows_;
  Index cols_;
  std::vector<Index> col_ptr_;
  std::vector<Index> row_idx_;
  std::vector<double> values_;
};

}  // namespace sparseq
