#include "recbench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace recbench {

RankedList::RankedList(const Eigen::Ref<const Eigen::RowVectorXd>& scores,
                       std::span<const Index> mask) {
  const Index n = static_cast<Index>(scores.size());
  rank_of_item_.assign(n, 0);
  std::vector<bool> masked(n, false);
  for (Index m : mask) masked[m] = true;
  order_.reserve(n - static_cast<Index>(mask.size()));
  for (Index i = 0; i < n; ++i)
    if (!masked[i]) order_.push_back(i);
  std::stable_sort(order_.begin(), order_.end(), [&](Index a, Index b) {
    double sa = scores[a], sb = scores[b];
    return sa != sb ? sa > sb : a < b;
  });
  for (std::size_t pos = 0; pos < order_.size(); ++pos)
    rank_of_item_[order_[pos]] = static_cast<Index>(pos) + 1;
}

double recallAtK(const RankedList& ranked, std::span<const Index> targets,
                 Index k) {
  require(k >= 1, "k must be >= 1");
  require(!targets.empty(), "no targets");
  Index hits = 0;
  for (Index t : targets) {
    Index r = ranked.rankOf(t);
    require(r > 0, "target is masked");
    if (r <= k) hits++;
  }
  return static_cast<double>(hits) / static_cast<double>(targets.size());
}

double hitRateAtK(const RankedList& ranked, Index target, Index k) {
  Index t[1] = {target};
  return recallAtK(ranked, t, k);
}

double meanRanks(const RankedList& ranked, std::span<const Index> targets) {
  require(!targets.empty(), "no targets");
  double sum = 0;
  for (Index t : targets) {
    Index r = ranked.rankOf(t);
    require(r > 0, "target is masked");
    sum += r;
  }
  return sum / static_cast<double>(targets.size());
}

double giniIndex(std::span<const double> exposure_counts) {
  const std::size_t n = exposure_counts.size();
  require(n >= 2, "need at least two items");
  double total = std::accumulate(exposure_counts.begin(),
                                 exposure_counts.end(), 0.0);
  require(total > 0, "no exposures");
  std::vector<double> p(exposure_counts.begin(), exposure_counts.end());
  for (double& v : p) v /= total;
  std::sort(p.begin(), p.end());
  double g = 0;
  for (std::size_t j = 1; j <= n; ++j)
    g += (2.0 * static_cast<double>(j) - static_cast<double>(n) - 1.0) *
         p[j - 1];
  return g / (static_cast<double>(n) - 1.0);
}

double shannonEntropy(std::span<const double> exposure_counts) {
  double total = std::accumulate(exposure_counts.begin(),
                                 exposure_counts.end(), 0.0);
  require(total > 0, "no exposures");
  double h = 0;
  for (double c : exposure_counts) {
    if (c <= 0) continue;
    double p = c / total;
    h -= p * std::log(p);
  }
  return h;
}

double ci95Proportion(double p, Index n_fold) {
  require(n_fold >= 1, "n_fold must be >= 1");
  return 1.96 * std::sqrt(p * (1.0 - p) / static_cast<double>(n_fold));
}

double ci95Mean(std::span<const double> per_user_values, Index n_fold) {
  require(n_fold >= 1, "n_fold must be >= 1");
  const std::size_t n = per_user_values.size();
  if (n < 2) return 0.0;
  double mean = std::accumulate(per_user_values.begin(),
                                per_user_values.end(), 0.0) /
                static_cast<double>(n);
  double ss = 0;
  for (double v : per_user_values) ss += (v - mean) * (v - mean);
  double sd = std::sqrt(ss / (static_cast<double>(n) - 1.0));
  return 1.96 * sd / std::sqrt(static_cast<double>(n_fold));
}

}  // namespace recbench
