#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "recbench/common.hpp"

namespace recbench {

/// Dense row-major matrix used for score batches and factor blocks.
using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using DenseMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Triplet {
  Index row;
  Index col;
  double value;
};

/// Row-major compressed sparse matrix. Column indices are strictly increasing
/// within each row and explicit zeros are dropped at build time. Immutable
/// after construction; safe to share across threads.
class SparseMatrix {
 public:
  SparseMatrix() = default;

  static SparseMatrix fromTriplets(Index n_rows, Index n_cols,
                                   std::vector<Triplet> triplets);
  /// rows[i] = sorted (col, value) pairs; validated.
  static SparseMatrix fromRows(
      Index n_rows, Index n_cols,
      const std::vector<std::vector<std::pair<Index, double>>>& rows);

  Index rows() const { return n_rows_; }
  Index cols() const { return n_cols_; }
  std::int64_t nonZeros() const {
    return static_cast<std::int64_t>(cols_.size());
  }

  Index rowSize(Index r) const { return indptr_[r + 1] - indptr_[r]; }
  std::span<const Index> rowCols(Index r) const {
    return {cols_.data() + indptr_[r],
            static_cast<std::size_t>(rowSize(r))};
  }
  std::span<const double> rowVals(Index r) const {
    return {vals_.data() + indptr_[r],
            static_cast<std::size_t>(rowSize(r))};
  }

  bool contains(Index r, Index c) const;
  double at(Index r, Index c) const;

  SparseMatrix transposed() const;
  /// Keeps the listed rows, in the given order.
  SparseMatrix selectRows(std::span<const Index> keep) const;

  /// L2 norm of each row.
  Vector rowNorms() const;
  /// Per-column number of stored entries.
  std::vector<Index> colCounts() const;
  /// Per-column sum of stored values.
  Vector colSums() const;

  RowMatrix toDense() const;

  /// y = this * x  (dense n_cols vector in, n_rows out).
  Vector multiply(const Vector& x) const;
  /// Y = this * X for dense X (n_cols x k) -> (n_rows x k).
  DenseMatrix multiply(const DenseMatrix& x) const;
  /// Y = this^T * X for dense X (n_rows x k) -> (n_cols x k).
  DenseMatrix multiplyTransposed(const DenseMatrix& x) const;

  /// Content hash covering shape and all stored entries.
  std::uint64_t contentHash() const;

  const std::vector<Index>& indptr() const { return indptr_; }
  const std::vector<Index>& colIndices() const { return cols_; }
  const std::vector<double>& values() const { return vals_; }

 private:
  Index n_rows_ = 0;
  Index n_cols_ = 0;
  std::vector<Index> indptr_ = {0};
  std::vector<Index> cols_;
  std::vector<double> vals_;
};

/// Incremental row-by-row construction.
class SparseMatrixBuilder {
 public:
  SparseMatrixBuilder(Index n_rows, Index n_cols);
  /// Appends entries for the next row; pairs need not be sorted, duplicates
  /// are summed, zeros dropped.
  void addRow(std::vector<std::pair<Index, double>> entries);
  SparseMatrix build();

 private:
  Index n_rows_;
  Index n_cols_;
  Index next_row_ = 0;
  std::vector<Index> indptr_;
  std::vector<Index> cols_;
  std::vector<double> vals_;
};

}  // namespace recbench
