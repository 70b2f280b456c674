#pragma once

#include "recbench/sparse.hpp"

namespace recbench {

enum class Axis { Rows, Cols };

/// Truncated factorization A ~ row_factors * diag(singular_values) *
/// col_factors^T. singular_values are non-increasing.
struct DenseFactorPair {
  DenseMatrix row_factors;   // n_rows x rank
  DenseMatrix col_factors;   // n_cols x rank
  Vector singular_values;    // rank
};

/// Shrunk cosine similarity, top-k per row. For axis == Cols the similarity
/// is between columns of m (output is n_cols x n_cols). Entry (i, j) holds
/// <v_i, v_j> / (|v_i| |v_j| + shrinkage), the k largest per row, j != i.
/// Ties broken toward the smaller index.
SparseMatrix cosineTopK(const SparseMatrix& m, Axis axis, double shrinkage,
                        Index k);

/// Randomized range-finder SVD (oversampling 10, power iterations 4).
/// Deterministic under seed.
DenseFactorPair truncatedSvd(const SparseMatrix& m, Index rank,
                             std::uint64_t seed);

/// Solves gram * Z = rhs for symmetric positive-definite gram (Cholesky).
DenseMatrix spdSolve(const DenseMatrix& gram, const DenseMatrix& rhs);

}  // namespace recbench
