#include "recbench/models/classical.hpp"

#include <algorithm>
#include <cmath>

#include "recbench/kernels.hpp"
#include "recbench/model_io.hpp"

namespace recbench {

RowMatrix ItemItemModel::score(const SparseMatrix& histories) const {
  require(histories.cols() == w_.rows(), "history/item-catalog mismatch");
  RowMatrix out = RowMatrix::Zero(histories.rows(), w_.cols());
  parallelFor(0, histories.rows(), [&](Index r) {
    auto cs = histories.rowCols(r);
    auto vs = histories.rowVals(r);
    double scale = 1.0;
    if (normalize_input_ && !cs.empty()) {
      double sum = 0;
      for (double v : vs) sum += v;
      if (sum > 0) scale = 1.0 / sum;
    }
    for (std::size_t t = 0; t < cs.size(); ++t) {
      const double w = vs[t] * scale;
      const Index i = cs[t];
      auto wc = w_.rowCols(i);
      auto wv = w_.rowVals(i);
      for (std::size_t u = 0; u < wc.size(); ++u)
        out(r, wc[u]) += w * wv[u];
    }
  });
  return out;
}

Vector ItemItemModel::itemRelatedness(Index i) const {
  Vector row = Vector::Zero(w_.cols());
  auto cs = w_.rowCols(i);
  auto vs = w_.rowVals(i);
  for (std::size_t t = 0; t < cs.size(); ++t) row[cs[t]] = vs[t];
  return row;
}

void ItemItemModel::savePayload(std::ostream& os) const {
  io::writeSparse(os, w_);
  io::writePod<std::uint8_t>(os, normalize_input_ ? 1 : 0);
}

RowMatrix DenseItemItemModel::score(const SparseMatrix& histories) const {
  require(histories.cols() == static_cast<Index>(w_.rows()),
          "history/item-catalog mismatch");
  RowMatrix out = RowMatrix::Zero(histories.rows(), w_.cols());
  parallelFor(0, histories.rows(), [&](Index r) {
    auto cs = histories.rowCols(r);
    auto vs = histories.rowVals(r);
    for (std::size_t t = 0; t < cs.size(); ++t)
      out.row(r) += vs[t] * w_.row(cs[t]);
  });
  return out;
}

Vector DenseItemItemModel::itemRelatedness(Index i) const {
  return w_.row(i).transpose();
}

void DenseItemItemModel::savePayload(std::ostream& os) const {
  io::writeDense(os, w_);
}

// ---------------------------------------------------------------------------

namespace {

class RandomModel : public Recommender {
 public:
  RandomModel(Index n_items, ParamMap params, std::uint64_t seed)
      : Recommender("random", std::move(params), seed), n_items_(n_items) {}

  RowMatrix score(const SparseMatrix& histories) const override {
    RowMatrix out(histories.rows(), n_items_);
    parallelFor(0, histories.rows(), [&](Index r) {
      // The user's identity is their history content, so the permutation is
      // independent of batch composition and row order.
      auto cs = histories.rowCols(r);
      const std::uint64_t user_key =
          fnv1a(cs.data(), cs.size() * sizeof(Index));
      for (Index i = 0; i < n_items_; ++i)
        out(r, i) =
            hashToUnit(mix64(seed_, user_key, static_cast<std::uint64_t>(i)));
    });
    return out;
  }

  Index itemCount() const override { return n_items_; }

 protected:
  void savePayload(std::ostream& os) const override {
    io::writePod<Index>(os, n_items_);
  }

 private:
  Index n_items_;
};

class PopularityModel : public Recommender {
 public:
  PopularityModel(Vector counts, ParamMap params, std::uint64_t seed)
      : Recommender("popularity", std::move(params), seed),
        counts_(std::move(counts)) {}

  RowMatrix score(const SparseMatrix& histories) const override {
    RowMatrix out(histories.rows(), counts_.size());
    for (Index r = 0; r < histories.rows(); ++r)
      out.row(r) = counts_.transpose();
    return out;
  }

  Index itemCount() const override { return static_cast<Index>(counts_.size()); }
  const Vector& counts() const { return counts_; }

 protected:
  void savePayload(std::ostream& os) const override {
    io::writeDenseVector(os, counts_);
  }

 private:
  Vector counts_;
};

class UserKnnModel : public Recommender {
 public:
  UserKnnModel(ParamMap params, std::uint64_t seed, SparseMatrix train)
      : Recommender("userknn", std::move(params), seed),
        train_(std::move(train)),
        train_t_(train_.transposed()),
        train_norms_(train_.rowNorms()),
        k_(static_cast<Index>(getInt(params_, "k"))),
        shrinkage_(getReal(params_, "shrinkage")),
        normalize_(getBool(params_, "normalize")) {}

  RowMatrix score(const SparseMatrix& histories) const override {
    require(histories.cols() == train_.cols(), "history/item-catalog mismatch");
    RowMatrix out = RowMatrix::Zero(histories.rows(), train_.cols());
    parallelFor(0, histories.rows(), [&](Index r) {
      scoreOne(histories.rowCols(r), histories.rowVals(r), out.row(r));
    });
    return out;
  }

  Index itemCount() const override { return train_.cols(); }

 protected:
  void savePayload(std::ostream& os) const override {
    io::writeSparse(os, train_);
  }

 private:
  void scoreOne(std::span<const Index> cols, std::span<const double> vals,
                Eigen::Ref<Eigen::RowVectorXd> out) const {
    double qnorm = 0;
    for (double v : vals) qnorm += v * v;
    qnorm = std::sqrt(qnorm);
    // Dot products against every training row that shares an item.
    std::vector<double> dots(train_.rows(), 0.0);
    std::vector<Index> touched;
    for (std::size_t t = 0; t < cols.size(); ++t) {
      auto us = train_t_.rowCols(cols[t]);
      auto ws = train_t_.rowVals(cols[t]);
      for (std::size_t u = 0; u < us.size(); ++u) {
        if (dots[us[u]] == 0.0) touched.push_back(us[u]);
        dots[us[u]] += vals[t] * ws[u];
      }
    }
    std::vector<std::pair<double, Index>> sims;
    sims.reserve(touched.size());
    for (Index v : touched) {
      const double denom = qnorm * train_norms_[v] + shrinkage_;
      if (dots[v] != 0.0 && denom > 0.0) sims.emplace_back(dots[v] / denom, v);
    }
    const std::size_t keep = std::min<std::size_t>(k_, sims.size());
    auto cmp = [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    };
    std::partial_sort(sims.begin(), sims.begin() + keep, sims.end(), cmp);
    double sim_sum = 0;
    for (std::size_t t = 0; t < keep; ++t) {
      const auto& [s, v] = sims[t];
      sim_sum += s;
      auto ic = train_.rowCols(v);
      auto iv = train_.rowVals(v);
      for (std::size_t u = 0; u < ic.size(); ++u) out[ic[u]] += s * iv[u];
    }
    if (normalize_ && sim_sum > 0) out /= sim_sum;
  }

  SparseMatrix train_;
  SparseMatrix train_t_;
  Vector train_norms_;
  Index k_;
  double shrinkage_;
  bool normalize_;
};

class PlainItemItem : public ItemItemModel {
 public:
  PlainItemItem(std::string name, ParamMap params, std::uint64_t seed,
                SparseMatrix w, bool normalize_input)
      : ItemItemModel(std::move(name), std::move(params), seed, std::move(w),
                      normalize_input) {}
};

class PlainDenseItemItem : public DenseItemItemModel {
 public:
  PlainDenseItemItem(std::string name, ParamMap params, std::uint64_t seed,
                     RowMatrix w)
      : DenseItemItemModel(std::move(name), std::move(params), seed,
                           std::move(w)) {}
};

}  // namespace

std::unique_ptr<Recommender> makeItemItemModel(std::string name,
                                               ParamMap params,
                                               std::uint64_t seed,
                                               SparseMatrix w,
                                               bool normalize_input) {
  return std::make_unique<PlainItemItem>(std::move(name), std::move(params),
                                         seed, std::move(w), normalize_input);
}

std::unique_ptr<Recommender> makeDenseItemItemModel(std::string name,
                                                    ParamMap params,
                                                    std::uint64_t seed,
                                                    RowMatrix w) {
  return std::make_unique<PlainDenseItemItem>(std::move(name),
                                              std::move(params), seed,
                                              std::move(w));
}

std::unique_ptr<Recommender> fitRandom(Index n_items, const ParamMap& params,
                                       std::uint64_t seed) {
  return std::make_unique<RandomModel>(n_items, params, seed);
}

std::unique_ptr<Recommender> fitPopularity(const SparseMatrix& train,
                                           const ParamMap& params,
                                           std::uint64_t seed) {
  return std::make_unique<PopularityModel>(train.colSums(), params, seed);
}

std::unique_ptr<Recommender> fitItemKnn(const SparseMatrix& train,
                                        const ParamMap& params,
                                        std::uint64_t seed) {
  const Index k = static_cast<Index>(getInt(params, "k"));
  const double shrinkage = getReal(params, "shrinkage");
  SparseMatrix w = cosineTopK(train, Axis::Cols, shrinkage, k);
  if (getBool(params, "normalize")) {
    // L1 row normalization of the neighbor weights.
    std::vector<Triplet> trips;
    for (Index r = 0; r < w.rows(); ++r) {
      double sum = 0;
      for (double v : w.rowVals(r)) sum += v;
      if (sum <= 0) continue;
      auto cs = w.rowCols(r);
      auto vs = w.rowVals(r);
      for (std::size_t t = 0; t < cs.size(); ++t)
        trips.push_back({r, cs[t], vs[t] / sum});
    }
    w = SparseMatrix::fromTriplets(w.rows(), w.cols(), std::move(trips));
  }
  return makeItemItemModel("itemknn", params, seed, std::move(w),
                           /*normalize_input=*/false);
}

std::unique_ptr<Recommender> fitUserKnn(const SparseMatrix& train,
                                        const ParamMap& params,
                                        std::uint64_t seed) {
  return std::make_unique<UserKnnModel>(params, seed, train);
}

std::unique_ptr<Recommender> loadClassical(const std::string& name,
                                           ParamMap params, std::uint64_t seed,
                                           std::istream& is) {
  if (name == "random") {
    Index n_items = io::readPod<Index>(is);
    return std::make_unique<RandomModel>(n_items, std::move(params), seed);
  }
  if (name == "popularity") {
    return std::make_unique<PopularityModel>(io::readDenseVector(is),
                                             std::move(params), seed);
  }
  if (name == "itemknn" || name == "slim" || name == "p3alpha" ||
      name == "rp3beta") {
    SparseMatrix w = io::readSparse(is);
    bool norm = io::readPod<std::uint8_t>(is) != 0;
    return makeItemItemModel(name, std::move(params), seed, std::move(w),
                             norm);
  }
  if (name == "ease" || name == "gfcf") {
    return makeDenseItemItemModel(name, std::move(params), seed,
                                  io::readDense(is));
  }
  if (name == "userknn") {
    return std::make_unique<UserKnnModel>(std::move(params), seed,
                                          io::readSparse(is));
  }
  fail("unknown classical model: " + name);
}

}  // namespace recbench
