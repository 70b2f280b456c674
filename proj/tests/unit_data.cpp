#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "recbench/data.hpp"
#include "test_support.hpp"

using namespace recbench;

namespace {

RawEvents events(std::initializer_list<RawEvent> list) {
  RawEvents out;
  out.events.assign(list);
  return out;
}

}  // namespace

TEST_CASE("binarize keeps >= threshold, drops below, dedupes") {
  auto in = events({{"u1", "a", 4.0, {}},
                    {"u1", "b", 3.5, {}},
                    {"u2", "a", 5.0, {}},
                    {"u2", "a", 4.5, {}},   // duplicate pair
                    {"u3", "c", 1.0, {}}});
  auto pos = binarize(in, 4.0);
  REQUIRE(pos.events.size() == 2);
  CHECK(pos.events[0].user == "u1");
  CHECK(pos.events[0].item == "a");
  CHECK(pos.events[1].user == "u2");
  CHECK(pos.events[0].value == 1.0);

  // play-count style: threshold 1 keeps count 1
  auto plays = binarize(events({{"u", "x", 1.0, {}}}), 1.0);
  CHECK(plays.events.size() == 1);

  // idempotence
  auto twice = binarize(binarize(in, 1.0), 1.0);
  auto once = binarize(in, 1.0);
  CHECK(twice.events.size() == once.events.size());
}

TEST_CASE("kcore_filter identity when degrees already suffice") {
  auto x = recbench::testing::clusteredDataset(12, 10, 2, 5, 3);
  auto y = kcoreFilter(x, 1);
  CHECK(y.matrix.nonZeros() == x.matrix.nonZeros());
  CHECK(y.users() == x.users());
}

TEST_CASE("kcore_filter cascade removes dependent rows") {
  // A:{X,Z} B:{X,Y} C:{Z} D:{X,Y}; h=2.
  // C has 1 item -> removed; Z drops to 1 user -> removed; A drops to 1 item
  // -> removed; X,Y keep 2 users (B, D); fixed point = {B,D} x {X,Y}.
  RawEvents ev = events({{"A", "X", 1, {}},
                         {"A", "Z", 1, {}},
                         {"B", "X", 1, {}},
                         {"B", "Y", 1, {}},
                         {"C", "Z", 1, {}},
                         {"D", "X", 1, {}},
                         {"D", "Y", 1, {}}});
  auto x = buildInteractions(ev);
  auto y = kcoreFilter(x, 2);
  CHECK(y.users() == 2);
  CHECK(y.items() == 2);
  std::set<std::string> users(y.user_ids.begin(), y.user_ids.end());
  CHECK(users == std::set<std::string>{"B", "D"});
  // fixed point: re-applying changes nothing
  auto z = kcoreFilter(y, 2);
  CHECK(z.users() == y.users());
  CHECK(z.items() == y.items());
  CHECK(z.matrix.contentHash() == y.matrix.contentHash());
}

TEST_CASE("kcore_filter errors when everything is eliminated") {
  RawEvents ev = events({{"A", "X", 1, {}}, {"B", "Y", 1, {}}});
  auto x = buildInteractions(ev);
  CHECK_THROWS_WITH_AS(kcoreFilter(x, 2), "h-core eliminated all data", Error);
}

TEST_CASE("make_folds balanced sizes and determinism") {
  auto x = recbench::testing::clusteredDataset(10, 8, 2, 3, 5);
  auto plan = makeFolds(x, 5, 42);
  for (int f = 0; f < 5; ++f) CHECK(plan.usersInFold(f).size() == 2);
  auto plan2 = makeFolds(x, 5, 42);
  CHECK(plan.fold_of_user == plan2.fold_of_user);
  auto plan3 = makeFolds(x, 5, 43);
  CHECK(plan.fold_of_user != plan3.fold_of_user);
}

TEST_CASE("make_folds sizes for 938 users split 5 ways") {
  auto x = recbench::testing::clusteredDataset(938, 40, 4, 6, 7);
  auto plan = makeFolds(x, 5, 1);
  std::vector<std::size_t> sizes;
  for (int f = 0; f < 5; ++f) sizes.push_back(plan.usersInFold(f).size());
  std::sort(sizes.begin(), sizes.end(), std::greater<>());
  CHECK(sizes == std::vector<std::size_t>{188, 188, 188, 187, 187});

  // every user appears exactly once across test folds
  std::vector<int> seen(938, 0);
  for (int f = 0; f < 5; ++f)
    for (Index u : plan.usersInFold(f)) seen[u]++;
  CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));

  // round structure: train/val/test tile the users each round
  for (int round = 0; round < 5; ++round) {
    auto trn = plan.trainUsers(round);
    auto val = plan.validationUsers(round);
    auto tst = plan.testUsers(round);
    CHECK(trn.size() + val.size() + tst.size() == 938);
    CHECK(trn.size() >= 3 * 187);
  }
}

TEST_CASE("select_holdouts: owned item, determinism, single-item user") {
  RawEvents ev = events({{"solo", "only", 1, {}},
                         {"duo", "only", 1, {}},
                         {"duo", "other", 1, {}}});
  auto x = buildInteractions(ev);
  std::vector<Index> users{0, 1};
  auto h = selectHoldouts(x, users, 9);
  CHECK(h.item_of_user[0] == 0);  // single-item user gets that item
  CHECK(x.matrix.contains(1, h.item_of_user[1]));
  auto h2 = selectHoldouts(x, users, 9);
  CHECK(h.item_of_user == h2.item_of_user);
  // independent of the order of the user list
  std::vector<Index> rev{1, 0};
  auto h3 = selectHoldouts(x, rev, 9);
  CHECK(h.item_of_user == h3.item_of_user);
}

TEST_CASE("select_holdouts uniform over the profile (Monte-Carlo)") {
  // one user with 5 items; frequency of each item over 10^4 seeds ~ 0.2
  RawEvents ev;
  for (int i = 0; i < 5; ++i)
    ev.events.push_back({"u", "i" + std::to_string(i), 1, {}});
  auto x = buildInteractions(ev);
  std::vector<Index> users{0};
  std::vector<int> counts(5, 0);
  const int n_seeds = 10000;
  for (int s = 0; s < n_seeds; ++s) {
    auto h = selectHoldouts(x, users, static_cast<std::uint64_t>(s));
    counts[h.item_of_user[0]]++;
  }
  for (int i = 0; i < 5; ++i) {
    double freq = counts[i] / double(n_seeds);
    CHECK(freq > 0.18);
    CHECK(freq < 0.22);
  }
}

TEST_CASE("holdout items always exist in the pre-split profile") {
  auto x = recbench::testing::clusteredDataset(40, 30, 3, 6, 11);
  std::vector<Index> users;
  for (Index u = 0; u < x.users(); ++u) users.push_back(u);
  auto h = selectHoldouts(x, users, 5);
  for (Index u = 0; u < x.users(); ++u)
    CHECK(x.matrix.contains(u, h.item_of_user[u]));
}

TEST_CASE("events reader parses delimited text with header and timestamp") {
  namespace fs = std::filesystem;
  auto path = fs::temp_directory_path() / "rb_events_test.tsv";
  {
    std::ofstream out(path);
    out << "user\titem\trating\tts\n";
    out << "u1\ti1\t4.5\t100\n";
    out << "u2\ti2\t2\t200\n";
  }
  TextTableSpec spec;
  spec.delimiter = '\t';
  spec.header_lines = 1;
  spec.timestamp_col = 3;
  auto ev = readEvents(path.string(), spec);
  REQUIRE(ev.events.size() == 2);
  CHECK(ev.events[0].user == "u1");
  CHECK(ev.events[0].value == 4.5);
  CHECK(*ev.events[0].timestamp == 100);
  fs::remove(path);
}

TEST_CASE("snapshot save/load round trip is content-identical") {
  namespace fs = std::filesystem;
  auto x = recbench::testing::clusteredDataset(25, 20, 2, 5, 13);
  DatasetSnapshot snap{x, makeFolds(x, 5, 3)};
  auto path = fs::temp_directory_path() / "rb_snap_test.bin";
  saveSnapshot(path.string(), snap);
  auto loaded = loadSnapshot(path.string());
  CHECK(loaded.interactions.contentHash() == snap.interactions.contentHash());
  CHECK(loaded.folds.fold_of_user == snap.folds.fold_of_user);
  CHECK(loaded.folds.seed == snap.folds.seed);
  fs::remove(path);

  std::ofstream bad(path, std::ios::binary);
  bad << "NOTSNAP0 garbage";
  bad.close();
  CHECK_THROWS_AS(loadSnapshot(path.string()), Error);
  fs::remove(path);
}
