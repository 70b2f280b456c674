#pragma once

#include "recbench/recommender.hpp"

namespace recbench {

/// Closed-form ridge item-item model: P = (X^T X + l2 I)^{-1},
/// B = I - P diag(1/diag(P)), diag(B) = 0 exactly.
std::unique_ptr<Recommender> fitEase(const SparseMatrix& train,
                                     const ParamMap& params,
                                     std::uint64_t seed);

/// Elastic-net regression of every item column on all others with the own
/// coefficient pinned to zero; coordinate descent over the cached Gram
/// matrix, optional non-negativity projection.
std::unique_ptr<Recommender> fitSlim(const SparseMatrix& train,
                                     const ParamMap& params,
                                     std::uint64_t seed);

/// Dense Gram matrix X^T X of the item columns (shared by Ease, SLIM and
/// the GFCF linear filter). Errors above the dense memory guard.
DenseMatrix itemGram(const SparseMatrix& x);

}  // namespace recbench
