#include "recbench/models/graph.hpp"

#include <algorithm>
#include <cmath>

#include "recbench/kernels.hpp"
#include "recbench/models/classical.hpp"
#include "recbench/models/linear.hpp"

namespace recbench {

namespace {

/// Row-stochastic transition matrix with entries raised to `alpha`.
SparseMatrix rowTransitions(const SparseMatrix& m, double alpha) {
  std::vector<Triplet> trips;
  trips.reserve(m.nonZeros());
  for (Index r = 0; r < m.rows(); ++r) {
    double sum = 0;
    for (double v : m.rowVals(r)) sum += v;
    if (sum <= 0) continue;
    auto cs = m.rowCols(r);
    auto vs = m.rowVals(r);
    for (std::size_t t = 0; t < cs.size(); ++t)
      trips.push_back({r, cs[t], std::pow(vs[t] / sum, alpha)});
  }
  return SparseMatrix::fromTriplets(m.rows(), m.cols(), std::move(trips));
}

/// W = a * b with per-row top-k truncation and optional per-column scaling
/// applied before truncation.
SparseMatrix walkProduct(const SparseMatrix& a, const SparseMatrix& b,
                         const Vector* col_scale, Index topk) {
  const Index n = a.rows();
  const Index m = b.cols();
  std::vector<std::vector<Triplet>> rows(n);
  parallelFor(0, n, [&](Index i) {
    std::vector<double> acc(m, 0.0);
    std::vector<Index> touched;
    auto cs = a.rowCols(i);
    auto vs = a.rowVals(i);
    for (std::size_t t = 0; t < cs.size(); ++t) {
      auto bc = b.rowCols(cs[t]);
      auto bv = b.rowVals(cs[t]);
      for (std::size_t u = 0; u < bc.size(); ++u) {
        if (acc[bc[u]] == 0.0) touched.push_back(bc[u]);
        acc[bc[u]] += vs[t] * bv[u];
      }
    }
    std::vector<std::pair<double, Index>> entries;
    entries.reserve(touched.size());
    for (Index j : touched) {
      double v = acc[j];
      if (col_scale) v *= (*col_scale)[j];
      if (v != 0.0) entries.emplace_back(v, j);
    }
    const std::size_t keep = std::min<std::size_t>(topk, entries.size());
    auto cmp = [](const auto& x, const auto& y) {
      return x.first != y.first ? x.first > y.first : x.second < y.second;
    };
    std::partial_sort(entries.begin(), entries.begin() + keep, entries.end(),
                      cmp);
    entries.resize(keep);
    for (const auto& [v, j] : entries) rows[i].push_back({i, j, v});
  });
  std::vector<Triplet> trips;
  for (auto& r : rows) trips.insert(trips.end(), r.begin(), r.end());
  return SparseMatrix::fromTriplets(n, m, std::move(trips));
}

std::unique_ptr<Recommender> fitWalk(const std::string& name,
                                     const SparseMatrix& train,
                                     const ParamMap& params,
                                     std::uint64_t seed, double beta) {
  const double alpha = getReal(params, "alpha");
  const auto topk = getInt(params, "topk");
  require(alpha > 0, "alpha must be > 0");
  require(topk >= 1, "topk must be >= 1");

  SparseMatrix p_ui = rowTransitions(train, alpha);
  SparseMatrix p_iu = rowTransitions(train.transposed(), alpha);
  std::unique_ptr<Vector> scale;
  if (beta != 0.0) {
    auto counts = train.colCounts();
    scale = std::make_unique<Vector>(train.cols());
    for (Index j = 0; j < train.cols(); ++j)
      (*scale)[j] =
          counts[j] > 0 ? std::pow(static_cast<double>(counts[j]), -beta) : 0.0;
  }
  SparseMatrix w = walkProduct(p_iu, p_ui, scale.get(),
                               static_cast<Index>(topk));
  return makeItemItemModel(name, params, seed, std::move(w),
                           /*normalize_input=*/true);
}

}  // namespace

std::unique_ptr<Recommender> fitP3Alpha(const SparseMatrix& train,
                                        const ParamMap& params,
                                        std::uint64_t seed) {
  return fitWalk("p3alpha", train, params, seed, 0.0);
}

std::unique_ptr<Recommender> fitRp3Beta(const SparseMatrix& train,
                                        const ParamMap& params,
                                        std::uint64_t seed) {
  return fitWalk("rp3beta", train, params, seed, getReal(params, "beta"));
}

std::unique_ptr<Recommender> fitGfcf(const SparseMatrix& train,
                                     const ParamMap& params,
                                     std::uint64_t seed) {
  const double filter_alpha = getReal(params, "filter_alpha");
  const auto rank = getInt(params, "rank");
  require(filter_alpha >= 0, "filter_alpha must be >= 0");
  if (filter_alpha > 0) require(rank >= 1, "low-pass rank required");

  // Degree normalizations; items/users absent from the training slice get a
  // zero scale instead of a division by zero.
  Vector du_inv(train.rows()), di_inv(train.cols()), di_sqrt(train.cols());
  for (Index u = 0; u < train.rows(); ++u) {
    const double d = static_cast<double>(train.rowSize(u));
    du_inv[u] = d > 0 ? 1.0 / std::sqrt(d) : 0.0;
  }
  auto item_counts = train.colCounts();
  for (Index i = 0; i < train.cols(); ++i) {
    const double d = static_cast<double>(item_counts[i]);
    di_inv[i] = d > 0 ? 1.0 / std::sqrt(d) : 0.0;
    di_sqrt[i] = std::sqrt(d);
  }

  std::vector<Triplet> trips;
  trips.reserve(train.nonZeros());
  for (Index u = 0; u < train.rows(); ++u) {
    auto cs = train.rowCols(u);
    auto vs = train.rowVals(u);
    for (std::size_t t = 0; t < cs.size(); ++t)
      trips.push_back({u, cs[t], vs[t] * du_inv[u] * di_inv[cs[t]]});
  }
  SparseMatrix r_norm =
      SparseMatrix::fromTriplets(train.rows(), train.cols(), std::move(trips));

  RowMatrix w = RowMatrix(itemGram(r_norm));
  if (filter_alpha > 0) {
    DenseFactorPair svd = truncatedSvd(
        r_norm, static_cast<Index>(std::min<std::int64_t>(
                    rank, std::min(r_norm.rows(), r_norm.cols()))),
        seed);
    w.noalias() +=
        filter_alpha * (svd.col_factors * svd.col_factors.transpose());
  }
  // Conjugate by the item degree scaling: D^{-1/2} (.) D^{1/2}.
  for (Index i = 0; i < train.cols(); ++i)
    for (Index j = 0; j < train.cols(); ++j)
      w(i, j) *= di_inv[i] * di_sqrt[j];
  return makeDenseItemItemModel("gfcf", params, seed, std::move(w));
}

}  // namespace recbench
