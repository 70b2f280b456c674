#pragma once

#include <span>
#include <string>
#include <vector>

#include "recbench/sparse.hpp"

namespace recbench {

/// Full ordering of one user's unmasked candidate items, best first. Built
/// from a raw score row with the global tie rule (score desc, item asc).
/// Ranks are 1-based; masked items have rank 0 and are not candidates.
class RankedList {
 public:
  /// mask entries are item indices excluded from the candidate set.
  RankedList(const Eigen::Ref<const Eigen::RowVectorXd>& scores,
             std::span<const Index> mask);

  Index candidates() const { return static_cast<Index>(order_.size()); }
  std::span<const Index> order() const { return order_; }
  /// 1-based rank of an item; 0 if the item is masked.
  Index rankOf(Index item) const { return rank_of_item_[item]; }
  std::span<const Index> topK(Index k) const {
    return {order_.data(),
            static_cast<std::size_t>(std::min<Index>(k, candidates()))};
  }

 private:
  std::vector<Index> order_;
  std::vector<Index> rank_of_item_;
};

double recallAtK(const RankedList& ranked, std::span<const Index> targets,
                 Index k);
/// Recall@k in the single-target case: 1 if the target is in the top k.
double hitRateAtK(const RankedList& ranked, Index target, Index k);
/// Average 1-based rank of the targets in the full candidate ranking.
double meanRanks(const RankedList& ranked, std::span<const Index> targets);

/// Gini index of an exposure-count distribution over the whole catalog
/// (items never recommended contribute p = 0). Counts are normalized to
/// probabilities, sorted ascending: sum_j (2j - n - 1) p_j / (n - 1).
double giniIndex(std::span<const double> exposure_counts);
/// Shannon entropy, natural log, 0 log 0 := 0.
double shannonEntropy(std::span<const double> exposure_counts);

/// Normal-approximation 95% half-width for a proportion, n = one test fold's
/// user count.
double ci95Proportion(double p, Index n_fold);
/// 1.96 * s / sqrt(n_fold) where s is the sample standard deviation of the
/// per-user values.
double ci95Mean(std::span<const double> per_user_values, Index n_fold);

struct MetricReport {
  std::string model;
  std::string dataset;
  std::string protocol;
  std::string metric;
  double value = 0;
  double ci95 = 0;
  std::vector<double> per_fold;
};

}  // namespace recbench
