#pragma once

#include "recbench/recommender.hpp"

namespace recbench {

/// Three-step random walk: W = P_iu P_ui with transition entries raised to
/// alpha; scoring multiplies the row-normalized history by W.
std::unique_ptr<Recommender> fitP3Alpha(const SparseMatrix& train,
                                        const ParamMap& params,
                                        std::uint64_t seed);

/// P3alpha with every W column discounted by popularity(j)^beta before the
/// top-k truncation.
std::unique_ptr<Recommender> fitRp3Beta(const SparseMatrix& train,
                                        const ParamMap& params,
                                        std::uint64_t seed);

/// Graph spectral filter on the degree-normalized interaction matrix:
/// W = D_i^{-1/2} (R~^T R~ + filter_alpha V V^T) D_i^{1/2} with V the
/// top-rank right singular vectors of R~ = D_u^{-1/2} X D_i^{-1/2}.
std::unique_ptr<Recommender> fitGfcf(const SparseMatrix& train,
                                     const ParamMap& params,
                                     std::uint64_t seed);

}  // namespace recbench
