#pragma once

#include "recbench/data.hpp"
#include "recbench/metrics.hpp"
#include "recbench/recommender.hpp"

namespace recbench {

/// Pluggable fit hook so the driver can interpose a model cache; defaults to
/// fitModel.
using FitProvider = std::function<std::unique_ptr<Recommender>(
    const std::string& model, const SparseMatrix& train, const ParamMap& params,
    std::uint64_t seed, const FitContext& ctx)>;

FitProvider plainFitter();

/// Per-user outcomes of one protocol run. Entry i describes users[i]:
/// utility[i] is the hit indicator (single-target tasks) or recall (rerank),
/// rank[i] the mean 1-based target rank. round_of_user is -1 for protocols
/// without folds. exposure_topk counts item appearances in the users' top
/// diversity_k lists, per_round_exposure splits them by CV round.
struct ProtocolResult {
  std::string protocol;
  std::string model;
  std::vector<Index> users;
  std::vector<double> utility;
  std::vector<double> rank;
  std::vector<int> round_of_user;
  Vector exposure_topk;
  std::vector<Vector> per_round_exposure;
  Index n_fold = 0;  // one test fold's user count (CI denominator)
  Index k = 50;
  Index diversity_k = 10;
};

/// Inputs of one strong-generalization CV round. Training rows exclude every
/// train user's hold-out item; eval sets follow the EvalSet convention
/// (mask = history support minus the target).
struct StrongGenRound {
  SparseMatrix train;
  std::vector<Index> train_users;
  EvalSet validation;
  std::vector<Index> validation_users;
  EvalSet test;
  std::vector<Index> test_users;
  EvalSet train_probe;  // train users' own hold-outs (early stopping)
};

StrongGenRound makeStrongGenRound(const Interactions& x, const FoldPlan& folds,
                                  int round, const HoldoutSet& holdouts,
                                  Index k);

struct HoldoutOutcome {
  std::vector<double> hits;
  std::vector<double> ranks;
  Vector exposure_topk;
};

/// Scores eval.histories, masks each row's support minus its target, and
/// collects hit@k, target rank, and top-diversity_k exposure counts.
HoldoutOutcome evaluateHoldout(const Recommender& model, const EvalSet& eval,
                               Index diversity_k);

/// Memorization: train on all full profiles, rank one seen item per user
/// with the rest of the profile masked.
ProtocolResult runLooMemorization(const Interactions& x,
                                  const std::string& model,
                                  const ParamMap& params, std::uint64_t seed,
                                  Index k, Index diversity_k,
                                  const FitProvider& fit = plainFitter());

/// Memorization: train on all full profiles, rank everything unmasked;
/// targets are the user's whole training profile.
ProtocolResult runRerankMemorization(const Interactions& x,
                                     const std::string& model,
                                     const ParamMap& params, std::uint64_t seed,
                                     Index k, Index diversity_k,
                                     const FitProvider& fit = plainFitter());

/// Full 5-round strong generalization. params_per_round has either one entry
/// (shared config) or folds.n_folds entries.
ProtocolResult runStrongGeneralization(
    const Interactions& x, const FoldPlan& folds, const std::string& model,
    const std::vector<ParamMap>& params_per_round, std::uint64_t seed, Index k,
    Index diversity_k, const FitProvider& fit = plainFitter());

// ---------------------------------------------------------------------------
// Subgroups (2.4-style partitions of the test users)

struct SubgroupPartition {
  std::string label;
  std::vector<Index> users;
  ParamMap info;  // parameters used (r, l, head size, ...)
};

/// Active = most-interacting third of the test users; inactive grows from
/// the least active until its interaction total is closest to the active
/// set's (may exceed a third of the users).
std::pair<SubgroupPartition, SubgroupPartition> partitionActiveInactive(
    const Interactions& x, std::span<const Index> test_users);

/// Similar/dissimilar thirds by the summed top-l cosine similarity of each
/// test input row against the training rows.
std::pair<SubgroupPartition, SubgroupPartition> partitionSimilarDissimilar(
    const SparseMatrix& test_inputs, std::span<const Index> test_users,
    const SparseMatrix& train, Index l);

/// Head = shortest popularity prefix holding at least half of the test
/// users' interactions; users split by where their hold-out item landed.
std::pair<SubgroupPartition, SubgroupPartition> partitionHeadTail(
    const Interactions& x, std::span<const Index> test_users,
    const HoldoutSet& holdouts);

/// Restriction of a strong-generalization result to one subgroup's users.
ProtocolResult restrictToSubgroup(const ProtocolResult& full,
                                  const SubgroupPartition& subgroup);

}  // namespace recbench
