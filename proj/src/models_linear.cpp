#include "recbench/models/linear.hpp"

#include <cmath>

#include "recbench/kernels.hpp"
#include "recbench/models/classical.hpp"

namespace recbench {

namespace {
constexpr Index kDenseItemGuard = 40000;
}

DenseMatrix itemGram(const SparseMatrix& x) {
  require(x.cols() <= kDenseItemGuard,
          "item catalog too large for a dense item-item matrix (limit 40000)");
  DenseMatrix g = DenseMatrix::Zero(x.cols(), x.cols());
  for (Index u = 0; u < x.rows(); ++u) {
    auto cs = x.rowCols(u);
    auto vs = x.rowVals(u);
    for (std::size_t a = 0; a < cs.size(); ++a)
      for (std::size_t b = 0; b < cs.size(); ++b)
        g(cs[a], cs[b]) += vs[a] * vs[b];
  }
  return g;
}

std::unique_ptr<Recommender> fitEase(const SparseMatrix& train,
                                     const ParamMap& params,
                                     std::uint64_t seed) {
  const double l2 = getReal(params, "l2");
  require(l2 > 0, "l2 must be > 0");
  const Index n = train.cols();
  DenseMatrix gram = itemGram(train);
  gram.diagonal().array() += l2;
  DenseMatrix p = spdSolve(gram, DenseMatrix::Identity(n, n));
  RowMatrix b = RowMatrix::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    const double pjj = p(j, j);
    for (Index i = 0; i < n; ++i) b(i, j) = -p(i, j) / pjj;
    b(j, j) = 0.0;
  }
  return makeDenseItemItemModel("ease", params, seed, std::move(b));
}

namespace {

/// Coordinate descent for one target column j of the SLIM problem
///   min_w 1/2 |x_j - X w|^2 + l2/2 |w|^2 + l1 |w|_1,  w_j = 0
/// over the cached Gram matrix. p tracks G w for O(n) coordinate moves.
std::vector<std::pair<Index, double>> slimColumn(const DenseMatrix& gram,
                                                 Index j, double l1, double l2,
                                                 std::int64_t max_iter,
                                                 double tol, bool nonneg) {
  const Index n = static_cast<Index>(gram.rows());
  std::vector<double> w(n, 0.0);
  Vector p = Vector::Zero(n);  // G w
  auto sweep = [&](const std::vector<Index>& coords) {
    double max_delta = 0;
    for (Index k : coords) {
      const double gkk = gram(k, k);
      if (gkk + l2 <= 0) continue;
      // Partial residual correlation with coordinate k.
      const double rho = gram(k, j) - p[k] + gkk * w[k];
      double wk;
      if (nonneg) {
        wk = std::max(0.0, rho - l1) / (gkk + l2);
      } else {
        const double mag = std::abs(rho) - l1;
        wk = mag <= 0 ? 0.0 : std::copysign(mag, rho) / (gkk + l2);
      }
      const double delta = wk - w[k];
      if (delta != 0.0) {
        p += delta * gram.col(k);
        w[k] = wk;
        max_delta = std::max(max_delta, std::abs(delta));
      }
    }
    return max_delta;
  };

  std::vector<Index> all;
  all.reserve(n - 1);
  for (Index k = 0; k < n; ++k)
    if (k != j) all.push_back(k);

  // Full pass, then iterate the active set until stable, then re-check all
  // coordinates for violators; sweeps share the max_iter budget.
  std::int64_t used = 0;
  while (used < max_iter) {
    const double full_delta = sweep(all);
    ++used;
    if (full_delta < tol) break;
    std::vector<Index> active;
    for (Index k : all)
      if (w[k] != 0.0) active.push_back(k);
    if (active.size() == all.size()) continue;
    while (used < max_iter) {
      ++used;
      if (sweep(active) < tol) break;
    }
  }

  std::vector<std::pair<Index, double>> out;
  for (Index k = 0; k < n; ++k)
    if (w[k] != 0.0) out.emplace_back(k, w[k]);
  return out;
}

}  // namespace

std::unique_ptr<Recommender> fitSlim(const SparseMatrix& train,
                                     const ParamMap& params,
                                     std::uint64_t seed) {
  const double l1 = getReal(params, "l1");
  const double l2 = getReal(params, "l2");
  const auto max_iter = getInt(params, "max_iter");
  const double tol = getReal(params, "tol");
  const bool nonneg = getBool(params, "nonneg");
  require(l1 >= 0 && l2 >= 0, "l1 and l2 must be >= 0");

  const Index n = train.cols();
  const DenseMatrix gram = itemGram(train);
  // Columns are independent elastic-net problems.
  std::vector<std::vector<std::pair<Index, double>>> cols(n);
  parallelFor(0, n, [&](Index j) {
    cols[j] = slimColumn(gram, j, l1, l2, max_iter, tol, nonneg);
  });
  std::vector<Triplet> trips;
  for (Index j = 0; j < n; ++j)
    for (const auto& [k, v] : cols[j]) trips.push_back({k, j, v});
  SparseMatrix w = SparseMatrix::fromTriplets(n, n, std::move(trips));
  return makeItemItemModel("slim", params, seed, std::move(w),
                           /*normalize_input=*/false);
}

}  // namespace recbench
