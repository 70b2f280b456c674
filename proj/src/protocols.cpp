#include "recbench/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace recbench {

FitProvider plainFitter() {
  return [](const std::string& model, const SparseMatrix& train,
            const ParamMap& params, std::uint64_t seed, const FitContext& ctx) {
    return fitModel(model, train, params, seed, ctx);
  };
}

namespace {

/// Row minus one item (the hold-out); keeps the order sorted.
std::vector<std::pair<Index, double>> rowWithout(const SparseMatrix& m,
                                                 Index row, Index drop) {
  std::vector<std::pair<Index, double>> out;
  auto cs = m.rowCols(row);
  auto vs = m.rowVals(row);
  for (std::size_t t = 0; t < cs.size(); ++t)
    if (cs[t] != drop) out.emplace_back(cs[t], vs[t]);
  return out;
}

EvalSet makeHoldoutEvalSet(const Interactions& x,
                           std::span<const Index> users,
                           const HoldoutSet& holdouts, Index k,
                           bool drop_target_from_input) {
  EvalSet eval;
  eval.k = k;
  std::vector<std::vector<std::pair<Index, double>>> rows;
  rows.reserve(users.size());
  for (Index u : users) {
    const Index target = holdouts.item_of_user[u];
    require(target >= 0, "user has no hold-out assigned");
    if (drop_target_from_input) {
      rows.push_back(rowWithout(x.matrix, u, target));
    } else {
      auto cs = x.matrix.rowCols(u);
      auto vs = x.matrix.rowVals(u);
      std::vector<std::pair<Index, double>> full;
      for (std::size_t t = 0; t < cs.size(); ++t) full.emplace_back(cs[t], vs[t]);
      rows.push_back(std::move(full));
    }
    eval.targets.push_back(target);
  }
  eval.histories = SparseMatrix::fromRows(static_cast<Index>(users.size()),
                                          x.items(), rows);
  return eval;
}

constexpr Index kScoreChunk = 256;

}  // namespace

StrongGenRound makeStrongGenRound(const Interactions& x, const FoldPlan& folds,
                                  int round, const HoldoutSet& holdouts,
                                  Index k) {
  StrongGenRound r;
  r.train_users = folds.trainUsers(round);
  r.validation_users = folds.validationUsers(round);
  r.test_users = folds.testUsers(round);

  // Train rows exclude each train user's hold-out item.
  std::vector<std::vector<std::pair<Index, double>>> rows;
  rows.reserve(r.train_users.size());
  for (Index u : r.train_users)
    rows.push_back(rowWithout(x.matrix, u, holdouts.item_of_user[u]));
  r.train = SparseMatrix::fromRows(static_cast<Index>(r.train_users.size()),
                                   x.items(), rows);

  r.validation = makeHoldoutEvalSet(x, r.validation_users, holdouts, k, true);
  r.test = makeHoldoutEvalSet(x, r.test_users, holdouts, k, true);
  r.train_probe = makeHoldoutEvalSet(x, r.train_users, holdouts, k, true);
  return r;
}

HoldoutOutcome evaluateHoldout(const Recommender& model, const EvalSet& eval,
                               Index diversity_k) {
  const Index n = eval.histories.rows();
  HoldoutOutcome out;
  out.hits.assign(n, 0.0);
  out.ranks.assign(n, 0.0);
  out.exposure_topk = Vector::Zero(model.itemCount());

  for (Index start = 0; start < n; start += kScoreChunk) {
    const Index stop = std::min<Index>(start + kScoreChunk, n);
    std::vector<Index> block(stop - start);
    std::iota(block.begin(), block.end(), start);
    RowMatrix scores = model.score(eval.histories.selectRows(block));
    std::vector<Vector> chunk_exposure(stop - start);
    parallelFor(start, stop, [&](Index r) {
      const Index target = eval.targets[r];
      // mask = history support minus the target (covers both the
      // generalization and leave-one-out conventions)
      std::vector<Index> mask;
      for (Index c : eval.histories.rowCols(r))
        if (c != target) mask.push_back(c);
      RankedList ranked(scores.row(r - start), mask);
      out.hits[r] = hitRateAtK(ranked, target, eval.k);
      out.ranks[r] = static_cast<double>(ranked.rankOf(target));
      Vector expo = Vector::Zero(model.itemCount());
      for (Index item : ranked.topK(diversity_k)) expo[item] += 1.0;
      chunk_exposure[r - start] = std::move(expo);
    });
    for (auto& e : chunk_exposure) out.exposure_topk += e;
  }
  return out;
}

namespace {

ProtocolResult runMemorization(const Interactions& x, const std::string& model,
                               const ParamMap& params, std::uint64_t seed,
                               Index k, Index diversity_k,
                               const FitProvider& fit, bool rerank) {
  ProtocolResult res;
  res.protocol = rerank ? "rerank-memo" : "loo-memo";
  res.model = model;
  res.k = k;
  res.diversity_k = diversity_k;

  std::vector<Index> all_users(x.users());
  std::iota(all_users.begin(), all_users.end(), 0);
  const HoldoutSet holdouts = selectHoldouts(x, all_users, seed);

  // Memorization trains on every full profile; the train users' hold-outs
  // drive early stopping for iterative models.
  EvalSet probe = makeHoldoutEvalSet(x, all_users, holdouts, k, true);
  FitContext ctx;
  ctx.early_stop = &probe;
  auto fitted = fit(model, x.matrix, params, seed, ctx);

  res.users = all_users;
  res.round_of_user.assign(x.users(), -1);
  res.n_fold = x.users();

  if (!rerank) {
    EvalSet eval = makeHoldoutEvalSet(x, all_users, holdouts, k, false);
    auto outcome = evaluateHoldout(*fitted, eval, diversity_k);
    res.utility = std::move(outcome.hits);
    res.rank = std::move(outcome.ranks);
    res.exposure_topk = std::move(outcome.exposure_topk);
  } else {
    res.utility.assign(x.users(), 0.0);
    res.rank.assign(x.users(), 0.0);
    res.exposure_topk = Vector::Zero(x.items());
    for (Index start = 0; start < x.users(); start += kScoreChunk) {
      const Index stop = std::min<Index>(start + kScoreChunk, x.users());
      std::vector<Index> block(stop - start);
      std::iota(block.begin(), block.end(), start);
      RowMatrix scores = fitted->score(x.matrix.selectRows(block));
      std::vector<Vector> chunk_exposure(stop - start);
      parallelFor(start, stop, [&](Index u) {
        RankedList ranked(scores.row(u - start), {});  // nothing masked
        auto targets = x.matrix.rowCols(u);
        res.utility[u] = recallAtK(ranked, targets, k);
        res.rank[u] = meanRanks(ranked, targets);
        Vector expo = Vector::Zero(x.items());
        for (Index item : ranked.topK(diversity_k)) expo[item] += 1.0;
        chunk_exposure[u - start] = std::move(expo);
      });
      for (auto& e : chunk_exposure) res.exposure_topk += e;
    }
  }
  res.per_round_exposure.push_back(res.exposure_topk);
  return res;
}

}  // namespace

ProtocolResult runLooMemorization(const Interactions& x,
                                  const std::string& model,
                                  const ParamMap& params, std::uint64_t seed,
                                  Index k, Index diversity_k,
                                  const FitProvider& fit) {
  return runMemorization(x, model, params, seed, k, diversity_k, fit, false);
}

ProtocolResult runRerankMemorization(const Interactions& x,
                                     const std::string& model,
                                     const ParamMap& params, std::uint64_t seed,
                                     Index k, Index diversity_k,
                                     const FitProvider& fit) {
  return runMemorization(x, model, params, seed, k, diversity_k, fit, true);
}

ProtocolResult runStrongGeneralization(
    const Interactions& x, const FoldPlan& folds, const std::string& model,
    const std::vector<ParamMap>& params_per_round, std::uint64_t seed, Index k,
    Index diversity_k, const FitProvider& fit) {
  require(params_per_round.size() == 1 ||
              params_per_round.size() ==
                  static_cast<std::size_t>(folds.n_folds),
          "need one config or one per round");
  ProtocolResult res;
  res.protocol = "strong-gen";
  res.model = model;
  res.k = k;
  res.diversity_k = diversity_k;
  res.exposure_topk = Vector::Zero(x.items());

  std::vector<Index> all_users(x.users());
  std::iota(all_users.begin(), all_users.end(), 0);
  const HoldoutSet holdouts = selectHoldouts(x, all_users, seed);

  for (int round = 0; round < folds.n_folds; ++round) {
    StrongGenRound r = makeStrongGenRound(x, folds, round, holdouts, k);
    const ParamMap& params = params_per_round.size() == 1
                                 ? params_per_round[0]
                                 : params_per_round[round];
    FitContext ctx;
    ctx.early_stop = &r.train_probe;
    auto fitted = fit(model, r.train, params, seed, ctx);
    auto outcome = evaluateHoldout(*fitted, r.test, diversity_k);
    for (std::size_t i = 0; i < r.test_users.size(); ++i) {
      res.users.push_back(r.test_users[i]);
      res.utility.push_back(outcome.hits[i]);
      res.rank.push_back(outcome.ranks[i]);
      res.round_of_user.push_back(round);
    }
    res.exposure_topk += outcome.exposure_topk;
    res.per_round_exposure.push_back(outcome.exposure_topk);
  }
  res.n_fold = (x.users() + folds.n_folds - 1) / folds.n_folds;
  return res;
}

// ---------------------------------------------------------------------------
// Subgroup partitions

std::pair<SubgroupPartition, SubgroupPartition> partitionActiveInactive(
    const Interactions& x, std::span<const Index> test_users) {
  std::vector<Index> by_activity(test_users.begin(), test_users.end());
  auto count = [&](Index u) { return x.matrix.rowSize(u); };
  std::sort(by_activity.begin(), by_activity.end(), [&](Index a, Index b) {
    return count(a) != count(b) ? count(a) > count(b) : a < b;
  });
  const std::size_t third = test_users.size() / 3;
  require(third >= 1, "too few test users to partition");

  SubgroupPartition active{"active", {}, {}};
  double active_total = 0;
  for (std::size_t i = 0; i < third; ++i) {
    active.users.push_back(by_activity[i]);
    active_total += count(by_activity[i]);
  }

  // Grow the inactive set from the least active user until its interaction
  // total is closest to the active set's.
  SubgroupPartition inactive{"inactive", {}, {}};
  double best_gap = std::abs(active_total);
  std::size_t best_len = 0;
  double running = 0;
  const std::size_t pool = by_activity.size() - third;
  for (std::size_t len = 1; len <= pool; ++len) {
    running += count(by_activity[by_activity.size() - len]);
    const double gap = std::abs(active_total - running);
    if (gap < best_gap) {
      best_gap = gap;
      best_len = len;
    }
  }
  for (std::size_t i = 0; i < best_len; ++i)
    inactive.users.push_back(by_activity[by_activity.size() - 1 - i]);
  std::sort(active.users.begin(), active.users.end());
  std::sort(inactive.users.begin(), inactive.users.end());
  double chosen = 0;
  for (Index u : inactive.users) chosen += count(u);
  active.info["interactions"] = active_total;
  inactive.info["interactions"] = chosen;
  inactive.info["r"] =
      best_len > 0 ? static_cast<double>(test_users.size()) /
                         static_cast<double>(best_len)
                   : 0.0;
  return {active, inactive};
}

std::pair<SubgroupPartition, SubgroupPartition> partitionSimilarDissimilar(
    const SparseMatrix& test_inputs, std::span<const Index> test_users,
    const SparseMatrix& train, Index l) {
  require(test_inputs.rows() == static_cast<Index>(test_users.size()),
          "row/user mismatch");
  const SparseMatrix train_t = train.transposed();
  const Vector train_norms = train.rowNorms();
  std::vector<double> sums(test_users.size(), 0.0);
  parallelFor(0, test_inputs.rows(), [&](Index r) {
    double qnorm = 0;
    for (double v : test_inputs.rowVals(r)) qnorm += v * v;
    qnorm = std::sqrt(qnorm);
    std::vector<double> dots(train.rows(), 0.0);
    auto cs = test_inputs.rowCols(r);
    auto vs = test_inputs.rowVals(r);
    for (std::size_t t = 0; t < cs.size(); ++t) {
      auto us = train_t.rowCols(cs[t]);
      auto ws = train_t.rowVals(cs[t]);
      for (std::size_t u = 0; u < us.size(); ++u)
        dots[us[u]] += vs[t] * ws[u];
    }
    std::vector<double> sims;
    for (Index v = 0; v < train.rows(); ++v) {
      const double denom = qnorm * train_norms[v];
      if (dots[v] > 0 && denom > 0) sims.push_back(dots[v] / denom);
    }
    const std::size_t keep = std::min<std::size_t>(l, sims.size());
    std::partial_sort(sims.begin(), sims.begin() + keep, sims.end(),
                      std::greater<>());
    sums[r] = std::accumulate(sims.begin(), sims.begin() + keep, 0.0);
  });

  std::vector<std::size_t> order(test_users.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return sums[a] != sums[b] ? sums[a] > sums[b]
                              : test_users[a] < test_users[b];
  });
  const std::size_t third = test_users.size() / 3;
  require(third >= 1, "too few test users to partition");
  SubgroupPartition similar{"similar", {}, {{"l", std::int64_t{l}}}};
  SubgroupPartition dissimilar{"dissimilar", {}, {{"l", std::int64_t{l}}}};
  for (std::size_t i = 0; i < third; ++i) {
    similar.users.push_back(test_users[order[i]]);
    dissimilar.users.push_back(test_users[order[order.size() - 1 - i]]);
  }
  std::sort(similar.users.begin(), similar.users.end());
  std::sort(dissimilar.users.begin(), dissimilar.users.end());
  return {similar, dissimilar};
}

std::pair<SubgroupPartition, SubgroupPartition> partitionHeadTail(
    const Interactions& x, std::span<const Index> test_users,
    const HoldoutSet& holdouts) {
  // Item popularity measured over the test users' full profiles.
  std::vector<double> counts(x.items(), 0.0);
  double total = 0;
  for (Index u : test_users)
    for (Index c : x.matrix.rowCols(u)) {
      counts[c] += 1;
      total += 1;
    }
  std::vector<Index> items(x.items());
  std::iota(items.begin(), items.end(), 0);
  std::sort(items.begin(), items.end(), [&](Index a, Index b) {
    return counts[a] != counts[b] ? counts[a] > counts[b] : a < b;
  });
  std::vector<bool> is_head(x.items(), false);
  double prefix = 0;
  Index head_size = 0;
  for (Index item : items) {
    if (prefix >= total / 2.0) break;
    is_head[item] = true;
    prefix += counts[item];
    ++head_size;
  }
  SubgroupPartition head{"head", {}, {{"head_items", std::int64_t{head_size}}}};
  SubgroupPartition tail{"tail",
                         {},
                         {{"tail_items",
                           std::int64_t{x.items() - head_size}}}};
  for (Index u : test_users) {
    const Index target = holdouts.item_of_user[u];
    require(target >= 0, "user has no hold-out assigned");
    (is_head[target] ? head.users : tail.users).push_back(u);
  }
  return {head, tail};
}

ProtocolResult restrictToSubgroup(const ProtocolResult& full,
                                  const SubgroupPartition& subgroup) {
  std::unordered_map<Index, std::size_t> pos;
  for (std::size_t i = 0; i < full.users.size(); ++i)
    pos.emplace(full.users[i], i);
  ProtocolResult out;
  out.protocol = full.protocol + ":" + subgroup.label;
  out.model = full.model;
  out.k = full.k;
  out.diversity_k = full.diversity_k;
  out.n_fold = full.n_fold;
  for (Index u : subgroup.users) {
    auto it = pos.find(u);
    require(it != pos.end(), "subgroup user missing from the protocol run");
    out.users.push_back(u);
    out.utility.push_back(full.utility[it->second]);
    out.rank.push_back(full.rank[it->second]);
    out.round_of_user.push_back(full.round_of_user[it->second]);
  }
  return out;
}

}  // namespace recbench
