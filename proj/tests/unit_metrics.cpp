#include <doctest.h>

#include <cmath>
#include <random>

#include "recbench/metrics.hpp"

using namespace recbench;

namespace {

RankedList rankedFromScores(std::vector<double> scores,
                            std::vector<Index> mask = {}) {
  Eigen::RowVectorXd row =
      Eigen::Map<Eigen::RowVectorXd>(scores.data(), scores.size());
  return RankedList(row, mask);
}

}  // namespace

TEST_CASE("ranked list ordering and tie rule") {
  auto r = rankedFromScores({0.5, 0.9, 0.5, 0.1});
  CHECK(r.rankOf(1) == 1);
  CHECK(r.rankOf(0) == 2);  // tie with item 2 broken toward the smaller index
  CHECK(r.rankOf(2) == 3);
  CHECK(r.rankOf(3) == 4);
  CHECK(r.candidates() == 4);

  auto masked = rankedFromScores({0.5, 0.9, 0.5, 0.1}, {1});
  CHECK(masked.rankOf(1) == 0);  // masked items are not candidates
  CHECK(masked.rankOf(0) == 1);
  CHECK(masked.candidates() == 3);
}

TEST_CASE("recall and hitrate basics") {
  // target ranked 1 with k 50
  std::vector<double> scores(60, 0.0);
  scores[7] = 1.0;
  auto r = rankedFromScores(scores);
  CHECK(hitRateAtK(r, 7, 50) == 1.0);

  // target ranked 51 with k 50 -> 0
  std::vector<double> scores2(60);
  for (int i = 0; i < 60; ++i) scores2[i] = 60.0 - i;
  auto r2 = rankedFromScores(scores2);
  CHECK(r2.rankOf(50) == 51);
  CHECK(hitRateAtK(r2, 50, 50) == 0.0);

  // 3 targets, 2 in top-10 -> 2/3
  std::vector<Index> targets{0, 5, 55};
  CHECK(recallAtK(r2, targets, 10) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("recall monotone non-decreasing in k (property)") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0, 1);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> scores(40);
    for (auto& s : scores) s = u(rng);
    auto r = rankedFromScores(scores);
    std::vector<Index> targets{3, 11, 17};
    double prev = 0;
    for (Index k = 1; k <= 40; ++k) {
      double rec = recallAtK(r, targets, k);
      CHECK(rec >= prev - 1e-15);
      CHECK(rec >= 0.0);
      CHECK(rec <= 1.0);
      prev = rec;
    }
    CHECK(prev == 1.0);
  }
}

TEST_CASE("mean_ranks basics and argsort invariance") {
  std::vector<double> scores{9, 7, 8, 1, 5};
  auto r = rankedFromScores(scores);
  CHECK(meanRanks(r, std::vector<Index>{0}) == 1.0);
  // ranks: item0=1, item2=2, item1=3, item4=4, item3=5
  CHECK(meanRanks(r, std::vector<Index>{2, 4}) == doctest::Approx(3.0));

  // strictly monotone transform of the scores leaves every rank unchanged
  std::vector<double> transformed;
  for (double s : scores) transformed.push_back(std::exp(0.5 * s) + 3);
  auto rt = rankedFromScores(transformed);
  for (Index i = 0; i < 5; ++i) CHECK(rt.rankOf(i) == r.rankOf(i));
}

TEST_CASE("mean rank of a random ranking concentrates at (m+1)/2") {
  const Index m = 101;
  std::mt19937_64 rng(5);
  double acc = 0;
  const int reps = 4000;
  std::uniform_real_distribution<double> u(0, 1);
  for (int rep = 0; rep < reps; ++rep) {
    std::vector<double> scores(m);
    for (auto& s : scores) s = u(rng);
    auto r = rankedFromScores(scores);
    acc += meanRanks(r, std::vector<Index>{0});
  }
  // expectation (m+1)/2 = 51; Monte-Carlo tolerance ~ 3 sigma
  CHECK(acc / reps == doctest::Approx(51.0).epsilon(0.03));
}

TEST_CASE("gini identities and paper formula") {
  std::vector<double> uniform(10, 3.0);
  CHECK(giniIndex(uniform) == doctest::Approx(0.0));

  std::vector<double> degenerate(10, 0.0);
  degenerate[4] = 17.0;
  CHECK(giniIndex(degenerate) == doctest::Approx(1.0));

  // hand evaluation of (1/(n-1)) sum (2j - n - 1) p_j with p = (.1,.2,.7):
  // (1/2) * (-2*0.1 + 0*0.2 + 2*0.7) = 0.6
  std::vector<double> p{0.1, 0.2, 0.7};
  CHECK(giniIndex(p) == doctest::Approx(0.6));

  // permutation invariance
  std::vector<double> q{0.7, 0.1, 0.2};
  CHECK(giniIndex(q) == doctest::Approx(giniIndex(p)));
}

TEST_CASE("gini bounded in [0,1] on random inputs (property)") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0, 10);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> counts(25);
    for (auto& c : counts) c = u(rng);
    double g = giniIndex(counts);
    CHECK(g >= 0.0);
    CHECK(g <= 1.0);
  }
}

TEST_CASE("shannon entropy identities") {
  std::vector<double> uniform(4, 2.5);
  CHECK(shannonEntropy(uniform) == doctest::Approx(std::log(4.0)));

  std::vector<double> degenerate{0, 9, 0};
  CHECK(shannonEntropy(degenerate) == doctest::Approx(0.0));

  std::vector<double> p{0.5, 0.25, 0.25};
  CHECK(shannonEntropy(p) == doctest::Approx(1.5 * std::log(2.0)));

  // permutation invariance + uniform maximizes (property-ish)
  std::vector<double> q{0.25, 0.5, 0.25};
  CHECK(shannonEntropy(q) == doctest::Approx(shannonEntropy(p)));
  std::vector<double> u3(3, 1.0);
  CHECK(shannonEntropy(p) <= shannonEntropy(u3) + 1e-12);
}

TEST_CASE("ci95 proportion matches the reference fold sizes") {
  // ml1m popularity: p = 0.251, fold 1207 -> 0.0245
  CHECK(ci95Proportion(0.251, 1207) == doctest::Approx(0.024).epsilon(0.03));
  // ml100k random: p = 0.047, fold 188 -> 0.0303
  CHECK(ci95Proportion(0.047, 188) == doctest::Approx(0.030).epsilon(0.02));
  // degenerate proportions have zero width
  CHECK(ci95Proportion(0.0, 100) == 0.0);
  CHECK(ci95Proportion(1.0, 100) == 0.0);
}

TEST_CASE("ci95 mean uses sample std over sqrt(fold size)") {
  std::vector<double> vals{1, 2, 3, 4, 5, 6, 7, 8};
  // sample std = sqrt(6); fold size 4
  CHECK(ci95Mean(vals, 4) ==
        doctest::Approx(1.96 * std::sqrt(6.0) / 2.0));
  std::vector<double> single{3.0};
  CHECK(ci95Mean(single, 4) == 0.0);
}
