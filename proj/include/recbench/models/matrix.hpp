#pragma once

#include "recbench/recommender.hpp"

namespace recbench {

/// Rank-truncated SVD projector: score(h) = (h V) V^T.
class PureSvdModel : public Recommender {
 public:
  PureSvdModel(ParamMap params, std::uint64_t seed, DenseMatrix v);

  RowMatrix score(const SparseMatrix& histories) const override;
  Index itemCount() const override { return static_cast<Index>(v_.rows()); }
  /// Fold-in: coordinates of the history in the singular basis, h V.
  Vector foldIn(std::span<const Index> items, std::span<const double> vals) const;
  const DenseMatrix& itemFactors() const { return v_; }

 protected:
  void savePayload(std::ostream& os) const override;

 private:
  DenseMatrix v_;  // n_items x rank
};

/// Implicit-feedback weighted ALS with confidence c = 1 + alpha x. Scoring a
/// history runs one ridge user-step against the fixed item factors (the same
/// update the trainer uses), then multiplies by the item factors.
class AlsModel : public Recommender {
 public:
  AlsModel(ParamMap params, std::uint64_t seed, DenseMatrix item_factors,
           DenseMatrix user_factors, std::vector<double> objective_trace);

  RowMatrix score(const SparseMatrix& histories) const override;
  Index itemCount() const override {
    return static_cast<Index>(item_factors_.rows());
  }
  Vector foldIn(std::span<const Index> items, std::span<const double> vals) const;

  const DenseMatrix& itemFactors() const { return item_factors_; }
  const DenseMatrix& userFactors() const { return user_factors_; }
  /// Weighted objective after each alternation (and the trailing user pass).
  const std::vector<double>& objectiveTrace() const { return objective_trace_; }

 protected:
  void savePayload(std::ostream& os) const override;

 private:
  DenseMatrix item_factors_;  // n_items x rank
  DenseMatrix user_factors_;  // n_train_users x rank (kept for diagnostics)
  std::vector<double> objective_trace_;
  double reg_ = 0;
  double alpha_ = 0;
  DenseMatrix gram_reg_;  // Y^T Y + reg I, cached for fold-in
};

std::unique_ptr<Recommender> fitPureSvd(const SparseMatrix& train,
                                        const ParamMap& params,
                                        std::uint64_t seed);

std::unique_ptr<Recommender> fitAls(const SparseMatrix& train,
                                    const ParamMap& params,
                                    std::uint64_t seed);

std::unique_ptr<Recommender> loadMatrixModel(const std::string& name,
                                             ParamMap params,
                                             std::uint64_t seed,
                                             std::istream& is);

}  // namespace recbench
