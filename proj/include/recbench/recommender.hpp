#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>

#include "recbench/params.hpp"
#include "recbench/sparse.hpp"

namespace recbench {

namespace hpo {
struct SearchSpace;
}

/// Evaluation probe handed to iterative fitters for early stopping:
/// histories scored with their own support masked, one target per row.
struct EvalSet {
  SparseMatrix histories;
  std::vector<Index> targets;
  Index k = 50;
};

struct FitContext {
  const EvalSet* early_stop = nullptr;  // optional
};

/// Uniform model contract. Fit state is immutable after fit; score() accepts
/// arbitrary user histories over the training item catalog, including users
/// never seen at fit time, and is safe to call concurrently.
class Recommender {
 public:
  virtual ~Recommender() = default;

  const std::string& name() const { return name_; }
  const ParamMap& params() const { return params_; }
  std::uint64_t seed() const { return seed_; }

  /// Raw scores, histories.rows() x n_items. No masking.
  virtual RowMatrix score(const SparseMatrix& histories) const = 0;

  /// Model relatedness row for item i (used by the semantic-coherence
  /// probe). Item-item models return row i of W; the default scores a
  /// one-hot dummy history.
  virtual Vector itemRelatedness(Index i) const;

  virtual Index itemCount() const = 0;

  /// Serializes fit state; loadRecommender restores it.
  void save(std::ostream& os) const;

 protected:
  Recommender(std::string name, ParamMap params, std::uint64_t seed)
      : name_(std::move(name)), params_(std::move(params)), seed_(seed) {}
  virtual void savePayload(std::ostream& os) const = 0;

  std::string name_;
  ParamMap params_;
  std::uint64_t seed_ = 0;
};

/// Sets masked entries (per-row item lists) to -inf.
void maskScores(RowMatrix& scores,
                const std::function<std::span<const Index>(Index)>& mask_of_row);
/// Convenience: mask every row with its own history support.
void maskWithHistories(RowMatrix& scores, const SparseMatrix& histories);

using FitFunction = std::function<std::unique_ptr<Recommender>(
    const SparseMatrix& train, const ParamMap& params, std::uint64_t seed,
    const FitContext& ctx)>;

struct ModelInfo {
  std::string name;
  ParamMap defaults;
  FitFunction fit;
};

const std::vector<std::string>& modelNames();
const ModelInfo& modelInfo(const std::string& name);
bool isModelName(const std::string& name);

/// Fits `name` with defaults overlaid by `overrides` (unknown keys error).
std::unique_ptr<Recommender> fitModel(const std::string& name,
                                      const SparseMatrix& train,
                                      const ParamMap& overrides,
                                      std::uint64_t seed,
                                      const FitContext& ctx = {});

std::unique_ptr<Recommender> loadRecommender(std::istream& is);

}  // namespace recbench
