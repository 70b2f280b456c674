#pragma once

#include "recbench/recommender.hpp"

namespace recbench {

/// Shared base for models that score through an item-item weight matrix:
/// score(h) = h * W (optionally with the input row L1-normalized first,
/// which the random-walk models need).
class ItemItemModel : public Recommender {
 public:
  const SparseMatrix& weights() const { return w_; }
  RowMatrix score(const SparseMatrix& histories) const override;
  Vector itemRelatedness(Index i) const override;
  Index itemCount() const override { return w_.rows(); }

 protected:
  ItemItemModel(std::string name, ParamMap params, std::uint64_t seed,
                SparseMatrix w, bool normalize_input)
      : Recommender(std::move(name), std::move(params), seed),
        w_(std::move(w)),
        normalize_input_(normalize_input) {}
  void savePayload(std::ostream& os) const override;

  SparseMatrix w_;
  bool normalize_input_ = false;
};

/// Same contract with a dense weight matrix (Ease, GFCF).
class DenseItemItemModel : public Recommender {
 public:
  const RowMatrix& weights() const { return w_; }
  RowMatrix score(const SparseMatrix& histories) const override;
  Vector itemRelatedness(Index i) const override;
  Index itemCount() const override { return static_cast<Index>(w_.rows()); }

 protected:
  DenseItemItemModel(std::string name, ParamMap params, std::uint64_t seed,
                     RowMatrix w)
      : Recommender(std::move(name), std::move(params), seed),
        w_(std::move(w)) {}
  void savePayload(std::ostream& os) const override;

  RowMatrix w_;
};

/// Seeded random permutation per user; the unpersonalized floor.
std::unique_ptr<Recommender> fitRandom(Index n_items, const ParamMap& params,
                                       std::uint64_t seed);

/// Scores every user with the items' training interaction counts.
std::unique_ptr<Recommender> fitPopularity(const SparseMatrix& train,
                                           const ParamMap& params,
                                           std::uint64_t seed);

/// Top-k shrunk cosine between item columns; score = history * W.
std::unique_ptr<Recommender> fitItemKnn(const SparseMatrix& train,
                                        const ParamMap& params,
                                        std::uint64_t seed);

/// Query-time user neighborhood: cosine of the query history against every
/// training row, truncated to the top k, then sim * X_train. Neighborhoods
/// are formed at score time so unseen users work naturally.
std::unique_ptr<Recommender> fitUserKnn(const SparseMatrix& train,
                                        const ParamMap& params,
                                        std::uint64_t seed);

/// Factories shared by the item-item fitters (KNN, SLIM, walks, Ease, GFCF)
/// and the model loader.
std::unique_ptr<Recommender> makeItemItemModel(std::string name,
                                               ParamMap params,
                                               std::uint64_t seed,
                                               SparseMatrix w,
                                               bool normalize_input);
std::unique_ptr<Recommender> makeDenseItemItemModel(std::string name,
                                                    ParamMap params,
                                                    std::uint64_t seed,
                                                    RowMatrix w);

/// Restores a fitted classical model from its serialized payload.
std::unique_ptr<Recommender> loadClassical(const std::string& name,
                                           ParamMap params, std::uint64_t seed,
                                           std::istream& is);

}  // namespace recbench
