#include <doctest.h>

#include <numeric>
#include <set>

#include "recbench/models/classical.hpp"
#include "recbench/protocols.hpp"
#include "test_support.hpp"

using namespace recbench;

namespace {

double mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
}

/// Model that replays the training matrix rows by content match: scoring a
/// history returns the stored full profile of the user whose training row
/// contains it. Used as the memorization oracle.
class EchoTrainingModel : public Recommender {
 public:
  explicit EchoTrainingModel(SparseMatrix train)
      : Recommender("echo", {}, 0), train_(std::move(train)) {}

  RowMatrix score(const SparseMatrix& histories) const override {
    RowMatrix out = RowMatrix::Zero(histories.rows(), train_.cols());
    for (Index r = 0; r < histories.rows(); ++r) {
      // find the training row whose support contains this history
      for (Index u = 0; u < train_.rows(); ++u) {
        bool contains = true;
        for (Index c : histories.rowCols(r))
          if (!train_.contains(u, c)) {
            contains = false;
            break;
          }
        if (contains && histories.rowSize(r) >= train_.rowSize(u) - 1 &&
            histories.rowSize(r) > 0) {
          for (Index c : train_.rowCols(u)) out(r, c) = 1.0;
          break;
        }
      }
    }
    return out;
  }
  Index itemCount() const override { return train_.cols(); }

 protected:
  void savePayload(std::ostream&) const override {}

 private:
  SparseMatrix train_;
};

}  // namespace

TEST_CASE("loo memorization: an oracle that replays training scores hits 1") {
  auto x = recbench::testing::clusteredDataset(20, 15, 2, 5, 3);
  FitProvider oracle = [&](const std::string&, const SparseMatrix& train,
                           const ParamMap&, std::uint64_t,
                           const FitContext&) -> std::unique_ptr<Recommender> {
    return std::make_unique<EchoTrainingModel>(train);
  };
  auto res = runLooMemorization(x, "popularity", {}, 1, 50, 10, oracle);
  CHECK(mean(res.utility) == 1.0);
  CHECK(mean(res.rank) == 1.0);
}

TEST_CASE("loo memorization: random model mean rank ~ (m - n_u + 2)/2") {
  const Index n_items = 200;
  auto x = recbench::testing::clusteredDataset(150, n_items, 1, 21, 5);
  auto res = runLooMemorization(x, "random", {}, 9, 50, 10);
  // every profile has 21 items; the mask hides 20, so candidates = 180 and
  // the uniform expectation is (200 - 21 + 2)/2 = 90.5 (tolerance ~3 sigma)
  CHECK(mean(res.rank) == doctest::Approx(90.5).epsilon(0.15));
  CHECK(res.users.size() == 150);
}

TEST_CASE("rerank memorization: forced recall when a user owns everything") {
  // user 0 owns all 8 items; recall@4 = 4/8 regardless of scores
  std::vector<Triplet> trips;
  for (Index i = 0; i < 8; ++i) trips.push_back({0, i, 1.0});
  for (Index u = 1; u < 4; ++u) {
    trips.push_back({u, u, 1.0});
    trips.push_back({u, u + 1, 1.0});
  }
  Interactions x;
  x.matrix = SparseMatrix::fromTriplets(4, 8, std::move(trips));
  for (int i = 0; i < 4; ++i) x.user_ids.push_back("u" + std::to_string(i));
  for (int i = 0; i < 8; ++i) x.item_ids.push_back("i" + std::to_string(i));

  auto res = runRerankMemorization(x, "random", {}, 3, 4, 4);
  CHECK(res.utility[0] == doctest::Approx(0.5));
}

TEST_CASE("rerank memorization: popularity on a 2-user toy vs hand ranking") {
  // counts: item0=2, item1=1, item2=1 -> ranking (0,1,2) for everyone
  Interactions x;
  x.matrix = SparseMatrix::fromTriplets(
      2, 3, {{0, 0, 1.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 2, 1.0}});
  x.user_ids = {"a", "b"};
  x.item_ids = {"x", "y", "z"};
  auto res = runRerankMemorization(x, "popularity", {}, 1, 1, 1);
  // top-1 is item 0 for both users; recall@1 = 1/2 each
  CHECK(res.utility[0] == doctest::Approx(0.5));
  CHECK(res.utility[1] == doctest::Approx(0.5));
  // user a targets {0,1}: ranks 1,2 -> 1.5 ; user b targets {0,2}: ranks 1,3 -> 2
  CHECK(res.rank[0] == doctest::Approx(1.5));
  CHECK(res.rank[1] == doctest::Approx(2.0));
}

TEST_CASE("strong generalization: every user is a test user exactly once") {
  auto x = recbench::testing::clusteredDataset(40, 25, 3, 6, 7);
  auto folds = makeFolds(x, 5, 11);
  auto res = runStrongGeneralization(x, folds, "popularity", {{}}, 13, 10, 5);
  CHECK(res.users.size() == 40);
  std::set<Index> unique(res.users.begin(), res.users.end());
  CHECK(unique.size() == 40);
  CHECK(res.n_fold == 8);
  // per-round exposure sums to diversity_k * fold size
  for (const auto& expo : res.per_round_exposure)
    CHECK(expo.sum() == doctest::Approx(5.0 * 8));
}

TEST_CASE("strong generalization: the hold-out never leaks into the input") {
  auto x = recbench::testing::clusteredDataset(30, 20, 2, 6, 9);
  auto folds = makeFolds(x, 5, 3);
  std::vector<Index> all(x.users());
  std::iota(all.begin(), all.end(), 0);
  auto holdouts = selectHoldouts(x, all, 13);
  for (int round = 0; round < 5; ++round) {
    auto r = makeStrongGenRound(x, folds, round, holdouts, 10);
    // training rows: the train users' hold-outs are absent
    for (std::size_t i = 0; i < r.train_users.size(); ++i) {
      const Index u = r.train_users[i];
      CHECK_FALSE(r.train.contains(static_cast<Index>(i),
                                   holdouts.item_of_user[u]));
      CHECK(r.train.rowSize(static_cast<Index>(i)) ==
            x.matrix.rowSize(u) - 1);
    }
    // test inputs: target removed, mask equals the input support
    for (std::size_t i = 0; i < r.test_users.size(); ++i) {
      const Index u = r.test_users[i];
      const Index target = holdouts.item_of_user[u];
      CHECK_FALSE(r.test.histories.contains(static_cast<Index>(i), target));
      CHECK(r.test.targets[i] == target);
      CHECK(x.matrix.contains(u, target));
    }
  }
}

TEST_CASE("strong generalization: no test row influences the fit") {
  auto x = recbench::testing::clusteredDataset(35, 18, 2, 5, 15);
  auto folds = makeFolds(x, 5, 7);
  std::vector<Index> all(x.users());
  std::iota(all.begin(), all.end(), 0);
  auto holdouts = selectHoldouts(x, all, 5);
  auto r = makeStrongGenRound(x, folds, 2, holdouts, 10);

  // the same training slice built from a dataset with the test users' rows
  // blanked out must hash identically
  std::vector<Triplet> trips;
  std::set<Index> test_set(r.test_users.begin(), r.test_users.end());
  for (Index u = 0; u < x.users(); ++u) {
    if (test_set.count(u)) continue;  // wiped
    for (Index c : x.matrix.rowCols(u)) trips.push_back({u, c, 1.0});
  }
  Interactions wiped;
  wiped.matrix = SparseMatrix::fromTriplets(x.users(), x.items(), trips);
  wiped.user_ids = x.user_ids;
  wiped.item_ids = x.item_ids;
  auto r2 = makeStrongGenRound(wiped, folds, 2, holdouts, 10);
  CHECK(r.train.contentHash() == r2.train.contentHash());

  auto a = fitModel("itemknn", r.train, {}, 3);
  auto b = fitModel("itemknn", r2.train, {}, 3);
  auto probe = recbench::testing::randomBinary(4, 18, 0.3, 1);
  CHECK((a->score(probe) - b->score(probe)).norm() == 0.0);
}

TEST_CASE("degenerate echo model: all-zero scores fall back to index order") {
  auto x = recbench::testing::clusteredDataset(25, 15, 2, 4, 19);
  auto folds = makeFolds(x, 5, 5);
  // a model echoing the input as scores gives the (absent) target score 0
  FitProvider echo = [&](const std::string&, const SparseMatrix& train,
                         const ParamMap&, std::uint64_t,
                         const FitContext&) -> std::unique_ptr<Recommender> {
    class InputEcho : public Recommender {
     public:
      explicit InputEcho(Index n) : Recommender("echo", {}, 0), n_(n) {}
      RowMatrix score(const SparseMatrix& h) const override {
        return h.toDense();
      }
      Index itemCount() const override { return n_; }

     protected:
      void savePayload(std::ostream&) const override {}

     private:
      Index n_;
    };
    return std::make_unique<InputEcho>(train.cols());
  };
  auto res = runStrongGeneralization(x, folds, "popularity", {{}}, 7, 10, 5,
                                     echo);
  // every unmasked candidate scores 0, so the rank of the target is its
  // position among candidates in index order
  std::vector<Index> all(x.users());
  std::iota(all.begin(), all.end(), 0);
  auto holdouts = selectHoldouts(x, all, 7);
  for (std::size_t i = 0; i < res.users.size(); ++i) {
    const Index u = res.users[i];
    const Index target = holdouts.item_of_user[u];
    Index expected_rank = 1;
    for (Index c = 0; c < target; ++c)
      if (!x.matrix.contains(u, c) || c == target) ++expected_rank;
    CHECK(res.rank[i] == doctest::Approx(double(expected_rank)));
  }
}

TEST_CASE("partition active/inactive: hand case with a capped pool") {
  // counts: 9,8,7,3,3,3,3,3,2 -> active = top 3 (24); the rest sum to 17,
  // so the closest inactive prefix is the whole remaining pool.
  std::vector<Triplet> trips;
  std::vector<Index> counts{9, 8, 7, 3, 3, 3, 3, 3, 2};
  for (Index u = 0; u < 9; ++u)
    for (Index c = 0; c < counts[u]; ++c) trips.push_back({u, c, 1.0});
  Interactions x;
  x.matrix = SparseMatrix::fromTriplets(9, 9, std::move(trips));
  for (int i = 0; i < 9; ++i) {
    x.user_ids.push_back("u" + std::to_string(i));
    x.item_ids.push_back("i" + std::to_string(i));
  }
  std::vector<Index> test_users(9);
  std::iota(test_users.begin(), test_users.end(), 0);
  auto [active, inactive] = partitionActiveInactive(x, test_users);
  CHECK(active.users == std::vector<Index>{0, 1, 2});
  CHECK(inactive.users == std::vector<Index>{3, 4, 5, 6, 7, 8});
  CHECK(getReal(active.info, "interactions") == 24.0);
  CHECK(getReal(inactive.info, "interactions") == 17.0);
}

TEST_CASE("partition active/inactive: equal counts give the symmetric split") {
  auto x = recbench::testing::clusteredDataset(12, 30, 2, 5, 23);
  std::vector<Index> test_users(12);
  std::iota(test_users.begin(), test_users.end(), 0);
  auto [active, inactive] = partitionActiveInactive(x, test_users);
  CHECK(active.users.size() == 4);
  CHECK(inactive.users.size() == 4);  // all counts equal -> r = 3
  // determinism
  auto [a2, i2] = partitionActiveInactive(x, test_users);
  CHECK(active.users == a2.users);
  CHECK(inactive.users == i2.users);
}

TEST_CASE("partition similar/dissimilar: identical and disjoint extremes") {
  // train: 12 users over two disjoint item blocks
  std::vector<Triplet> trips;
  for (Index u = 0; u < 12; ++u)
    for (Index c = 0; c < 4; ++c)
      trips.push_back({u, (u % 2) * 4 + c, 1.0});
  auto train = SparseMatrix::fromTriplets(12, 12, std::move(trips));

  // test users: 0..1 identical to train block A, 2..3 overlap, 4..5 disjoint
  std::vector<Triplet> t2;
  for (Index u : {0, 1})
    for (Index c = 0; c < 4; ++c) t2.push_back({u, c, 1.0});
  for (Index u : {2, 3}) {
    t2.push_back({u, 0, 1.0});
    t2.push_back({u, 8, 1.0});
  }
  for (Index u : {4, 5})
    for (Index c = 8; c < 12; ++c) t2.push_back({u, c, 1.0});
  auto test_inputs = SparseMatrix::fromTriplets(6, 12, std::move(t2));
  std::vector<Index> test_users{100, 101, 102, 103, 104, 105};

  auto [similar, dissimilar] =
      partitionSimilarDissimilar(test_inputs, test_users, train, 10);
  CHECK(similar.users == std::vector<Index>{100, 101});
  CHECK(dissimilar.users == std::vector<Index>{104, 105});
}

TEST_CASE("partition head/tail: half-mass prefix and tie-break") {
  // one item holds exactly half the interactions -> head = that item alone
  std::vector<Triplet> trips;
  for (Index u = 0; u < 6; ++u) trips.push_back({u, 0, 1.0});
  trips.push_back({0, 1, 1.0});
  trips.push_back({1, 2, 1.0});
  trips.push_back({2, 3, 1.0});
  trips.push_back({3, 1, 1.0});
  trips.push_back({4, 2, 1.0});
  trips.push_back({5, 3, 1.0});
  Interactions x;
  x.matrix = SparseMatrix::fromTriplets(6, 4, std::move(trips));
  for (int i = 0; i < 6; ++i) x.user_ids.push_back("u" + std::to_string(i));
  for (int i = 0; i < 4; ++i) x.item_ids.push_back("i" + std::to_string(i));

  std::vector<Index> test_users{0, 1, 2, 3, 4, 5};
  HoldoutSet holdouts;
  holdouts.item_of_user = {0, 2, 0, 1, 0, 3};
  auto [head, tail] = partitionHeadTail(x, test_users, holdouts);
  CHECK(getInt(head.info, "head_items") == 1);
  CHECK(head.users == std::vector<Index>{0, 2, 4});
  CHECK(tail.users == std::vector<Index>{1, 3, 5});
}

TEST_CASE("subgroup restriction: whole set equals the full run, parts recombine") {
  auto x = recbench::testing::clusteredDataset(45, 22, 3, 6, 27);
  auto folds = makeFolds(x, 5, 17);
  auto full = runStrongGeneralization(x, folds, "itemknn", {{}}, 19, 10, 5);

  SubgroupPartition everyone{"all", full.users, {}};
  auto same = restrictToSubgroup(full, everyone);
  CHECK(mean(same.utility) == doctest::Approx(mean(full.utility)));
  CHECK(mean(same.rank) == doctest::Approx(mean(full.rank)));

  // head/tail tile the test users; the weighted recombination of subgroup
  // hit rates equals the whole-set hit rate
  std::vector<Index> all(x.users());
  std::iota(all.begin(), all.end(), 0);
  auto holdouts = selectHoldouts(x, all, 19);
  auto [head, tail] = partitionHeadTail(x, full.users, holdouts);
  auto head_res = restrictToSubgroup(full, head);
  auto tail_res = restrictToSubgroup(full, tail);
  CHECK(head.users.size() + tail.users.size() == full.users.size());
  const double recombined =
      (mean(head_res.utility) * head.users.size() +
       mean(tail_res.utility) * tail.users.size()) /
      double(full.users.size());
  CHECK(recombined == doctest::Approx(mean(full.utility)));

  // disjoint subgroups: no shared users
  std::set<Index> h(head.users.begin(), head.users.end());
  for (Index u : tail.users) CHECK(h.count(u) == 0);
}
