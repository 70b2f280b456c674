#include "recbench/sparse.hpp"

#include <algorithm>
#include <cmath>

namespace recbench {

SparseMatrix SparseMatrix::fromTriplets(Index n_rows, Index n_cols,
                                        std::vector<Triplet> triplets) {
  require(n_rows >= 0 && n_cols >= 0, "negative dimensions");
  std::sort(triplets.begin(), triplets.end(), [](const auto& a, const auto& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  SparseMatrix m;
  m.n_rows_ = n_rows;
  m.n_cols_ = n_cols;
  m.indptr_.assign(1, 0);
  m.indptr_.reserve(n_rows + 1);
  m.cols_.reserve(triplets.size());
  m.vals_.reserve(triplets.size());
  std::size_t i = 0;
  for (Index r = 0; r < n_rows; ++r) {
    while (i < triplets.size() && triplets[i].row == r) {
      require(triplets[i].col >= 0 && triplets[i].col < n_cols,
              "column index out of range");
      double v = triplets[i].value;
      Index c = triplets[i].col;
      ++i;
      while (i < triplets.size() && triplets[i].row == r &&
             triplets[i].col == c) {
        v += triplets[i].value;
        ++i;
      }
      if (v != 0.0) {
        m.cols_.push_back(c);
        m.vals_.push_back(v);
      }
    }
    m.indptr_.push_back(static_cast<Index>(m.cols_.size()));
  }
  require(i == triplets.size(), "row index out of range");
  return m;
}

SparseMatrix SparseMatrix::fromRows(
    Index n_rows, Index n_cols,
    const std::vector<std::vector<std::pair<Index, double>>>& rows) {
  require(static_cast<Index>(rows.size()) == n_rows, "row count mismatch");
  std::vector<Triplet> trips;
  for (Index r = 0; r < n_rows; ++r)
    for (const auto& [c, v] : rows[r]) trips.push_back({r, c, v});
  return fromTriplets(n_rows, n_cols, std::move(trips));
}

bool SparseMatrix::contains(Index r, Index c) const {
  auto cols = rowCols(r);
  return std::binary_search(cols.begin(), cols.end(), c);
}

double SparseMatrix::at(Index r, Index c) const {
  auto cols = rowCols(r);
  auto it = std::lower_bound(cols.begin(), cols.end(), c);
  if (it == cols.end() || *it != c) return 0.0;
  return vals_[indptr_[r] + (it - cols.begin())];
}

SparseMatrix SparseMatrix::transposed() const {
  SparseMatrix t;
  t.n_rows_ = n_cols_;
  t.n_cols_ = n_rows_;
  std::vector<Index> counts(n_cols_ + 1, 0);
  for (Index c : cols_) counts[c + 1]++;
  for (Index c = 0; c < n_cols_; ++c) counts[c + 1] += counts[c];
  t.indptr_ = counts;
  t.cols_.resize(cols_.size());
  t.vals_.resize(vals_.size());
  std::vector<Index> cursor(counts.begin(), counts.end() - 1);
  for (Index r = 0; r < n_rows_; ++r) {
    for (Index k = indptr_[r]; k < indptr_[r + 1]; ++k) {
      Index pos = cursor[cols_[k]]++;
      t.cols_[pos] = r;
      t.vals_[pos] = vals_[k];
    }
  }
  return t;
}

SparseMatrix SparseMatrix::selectRows(std::span<const Index> keep) const {
  SparseMatrix out;
  out.n_rows_ = static_cast<Index>(keep.size());
  out.n_cols_ = n_cols_;
  out.indptr_.assign(1, 0);
  for (Index r : keep) {
    require(r >= 0 && r < n_rows_, "row index out of range");
    auto cs = rowCols(r);
    auto vs = rowVals(r);
    out.cols_.insert(out.cols_.end(), cs.begin(), cs.end());
    out.vals_.insert(out.vals_.end(), vs.begin(), vs.end());
    out.indptr_.push_back(static_cast<Index>(out.cols_.size()));
  }
  return out;
}

Vector SparseMatrix::rowNorms() const {
  Vector norms(n_rows_);
  for (Index r = 0; r < n_rows_; ++r) {
    double s = 0;
    for (double v : rowVals(r)) s += v * v;
    norms[r] = std::sqrt(s);
  }
  return norms;
}

std::vector<Index> SparseMatrix::colCounts() const {
  std::vector<Index> counts(n_cols_, 0);
  for (Index c : cols_) counts[c]++;
  return counts;
}

Vector SparseMatrix::colSums() const {
  Vector sums = Vector::Zero(n_cols_);
  for (std::size_t k = 0; k < cols_.size(); ++k) sums[cols_[k]] += vals_[k];
  return sums;
}

RowMatrix SparseMatrix::toDense() const {
  RowMatrix d = RowMatrix::Zero(n_rows_, n_cols_);
  for (Index r = 0; r < n_rows_; ++r)
    for (Index k = indptr_[r]; k < indptr_[r + 1]; ++k)
      d(r, cols_[k]) = vals_[k];
  return d;
}

Vector SparseMatrix::multiply(const Vector& x) const {
  require(x.size() == n_cols_, "dimension mismatch");
  Vector y = Vector::Zero(n_rows_);
  for (Index r = 0; r < n_rows_; ++r) {
    double s = 0;
    for (Index k = indptr_[r]; k < indptr_[r + 1]; ++k)
      s += vals_[k] * x[cols_[k]];
    y[r] = s;
  }
  return y;
}

DenseMatrix SparseMatrix::multiply(const DenseMatrix& x) const {
  require(x.rows() == n_cols_, "dimension mismatch");
  DenseMatrix y = DenseMatrix::Zero(n_rows_, x.cols());
  parallelFor(0, n_rows_, [&](Index r) {
    for (Index k = indptr_[r]; k < indptr_[r + 1]; ++k)
      y.row(r) += vals_[k] * x.row(cols_[k]);
  });
  return y;
}

DenseMatrix SparseMatrix::multiplyTransposed(const DenseMatrix& x) const {
  require(x.rows() == n_rows_, "dimension mismatch");
  DenseMatrix y = DenseMatrix::Zero(n_cols_, x.cols());
  for (Index r = 0; r < n_rows_; ++r)
    for (Index k = indptr_[r]; k < indptr_[r + 1]; ++k)
      y.row(cols_[k]) += vals_[k] * x.row(r);
  return y;
}

std::uint64_t SparseMatrix::contentHash() const {
  std::uint64_t h = fnv1a(&n_rows_, sizeof(n_rows_));
  h = fnv1a(&n_cols_, sizeof(n_cols_), h);
  h = fnv1a(indptr_.data(), indptr_.size() * sizeof(Index), h);
  h = fnv1a(cols_.data(), cols_.size() * sizeof(Index), h);
  h = fnv1a(vals_.data(), vals_.size() * sizeof(double), h);
  return h;
}

SparseMatrixBuilder::SparseMatrixBuilder(Index n_rows, Index n_cols)
    : n_rows_(n_rows), n_cols_(n_cols) {
  indptr_.assign(1, 0);
}

void SparseMatrixBuilder::addRow(std::vector<std::pair<Index, double>> entries) {
  require(next_row_ < n_rows_, "too many rows");
  std::sort(entries.begin(), entries.end());
  for (std::size_t i = 0; i < entries.size();) {
    auto [c, v] = entries[i];
    require(c >= 0 && c < n_cols_, "column index out of range");
    std::size_t j = i + 1;
    while (j < entries.size() && entries[j].first == c) v += entries[j++].second;
    if (v != 0.0) {
      cols_.push_back(c);
      vals_.push_back(v);
    }
    i = j;
  }
  indptr_.push_back(static_cast<Index>(cols_.size()));
  ++next_row_;
}

SparseMatrix SparseMatrixBuilder::build() {
  require(next_row_ == n_rows_, "not all rows added");
  std::vector<Triplet> trips;
  trips.reserve(cols_.size());
  for (Index r = 0; r < n_rows_; ++r)
    for (Index k = indptr_[r]; k < indptr_[r + 1]; ++k)
      trips.push_back({r, cols_[k], vals_[k]});
  return SparseMatrix::fromTriplets(n_rows_, n_cols_, std::move(trips));
}

}  // namespace recbench
