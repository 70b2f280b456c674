#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "recbench/hpo.hpp"
#include "recbench/recommender.hpp"

using namespace recbench;
using namespace recbench::hpo;

namespace {

SearchSpace unitSpace() {
  SearchSpace s;
  s.model = "toy";
  s.params["x"] = Domain::real(0.0, 1.0);
  return s;
}

}  // namespace

TEST_CASE("search with a single trial returns that trial") {
  auto res = search(unitSpace(), [](const ParamMap& p) { return getReal(p, "x"); },
                    1, Strategy::Random, 5);
  REQUIRE(res.history.size() == 1);
  CHECK(res.best.objective == res.history[0].objective);
  CHECK(res.best.index == 0);
}

TEST_CASE("best objective dominates the history; determinism under seed") {
  auto fn = [](const ParamMap& p) {
    double x = getReal(p, "x");
    return -(x - 0.3) * (x - 0.3);
  };
  for (Strategy strat : {Strategy::Random, Strategy::Tpe}) {
    auto a = search(unitSpace(), fn, 40, strat, 11);
    auto b = search(unitSpace(), fn, 40, strat, 11);
    CHECK(a.history.size() == 40);
    CHECK(a.best.objective == b.best.objective);
    CHECK(canonical(a.best.config) == canonical(b.best.config));
    for (const auto& t : a.history) CHECK(a.best.objective >= t.objective);
  }
}

TEST_CASE("tpe beats random on a smooth unimodal objective (mean over seeds)") {
  auto fn = [](const ParamMap& p) {
    double x = getReal(p, "x");
    return -std::abs(x - 0.7312);
  };
  double random_sum = 0, tpe_sum = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    random_sum += search(unitSpace(), fn, 30, Strategy::Random, seed).best.objective;
    tpe_sum += search(unitSpace(), fn, 30, Strategy::Tpe, seed).best.objective;
  }
  CHECK(tpe_sum / 20.0 > random_sum / 20.0);
}

TEST_CASE("mixed domains sample within bounds and integer types hold") {
  SearchSpace s;
  s.model = "mixed";
  s.params["lr"] = Domain::logReal(1e-4, 1e-1);
  s.params["k"] = Domain::logInt(5, 500);
  s.params["flag"] = Domain::categorical({true, false});
  s.params["ratio"] = Domain::real(0.25, 0.75);
  auto res = search(
      s, [](const ParamMap&) { return 0.0; }, 60, Strategy::Random, 3);
  for (const auto& t : res.history) {
    const double lr = getReal(t.config, "lr");
    CHECK(lr >= 1e-4);
    CHECK(lr <= 1e-1);
    const auto k = getInt(t.config, "k");
    CHECK(k >= 5);
    CHECK(k <= 500);
    const double ratio = getReal(t.config, "ratio");
    CHECK(ratio >= 0.25);
    CHECK(ratio <= 0.75);
    getBool(t.config, "flag");  // type check
  }
  // log sampling actually explores the low decades
  std::set<std::int64_t> ks;
  for (const auto& t : res.history) ks.insert(getInt(t.config, "k"));
  CHECK(*ks.begin() < 50);
  CHECK(*ks.rbegin() > 100);
}

TEST_CASE("failing trials are recorded; total failure raises with the log") {
  int calls = 0;
  auto flaky = [&calls](const ParamMap& p) {
    ++calls;
    double x = getReal(p, "x");
    if (x < 0.5) throw Error("boom");
    return x;
  };
  auto res = search(unitSpace(), flaky, 30, Strategy::Random, 7);
  CHECK(res.history.size() == 30);
  int failed = 0;
  for (const auto& t : res.history)
    if (!t.ok) {
      ++failed;
      CHECK(t.error == "boom");
    }
  CHECK(failed > 0);
  CHECK(res.best.objective >= 0.5);

  auto always = [](const ParamMap&) -> double { throw Error("nope"); };
  CHECK_THROWS_AS(search(unitSpace(), always, 5, Strategy::Random, 1), Error);
}

TEST_CASE("trial log replay re-yields the identical best config") {
  namespace fs = std::filesystem;
  const auto log = fs::temp_directory_path() / "rb_trials_test.jsonl";
  fs::remove(log);
  auto fn = [](const ParamMap& p) {
    double x = getReal(p, "x");
    return -(x - 0.62) * (x - 0.62);
  };
  auto live = search(unitSpace(), fn, 25, Strategy::Tpe, 13, log.string(), 2);
  auto replay = replayLog(log.string());
  CHECK(replay.history.size() == 25);
  CHECK(canonical(replay.best.config) == canonical(live.best.config));
  CHECK(replay.best.objective == doctest::Approx(live.best.objective));
  CHECK(replay.history[3].fold == 2);
  fs::remove(log);
}

TEST_CASE("default search spaces exist for every model and respect caps") {
  for (const auto& model : modelNames()) {
    auto space = defaultSearchSpace(model, 60, 40);
    if (model == "random" || model == "popularity") {
      CHECK(space.empty());
      continue;
    }
    for (const auto& [name, dom] : space.params) {
      if (dom.kind == Domain::Kind::Categorical) {
        CHECK(!dom.choices.empty());
      } else {
        CHECK(dom.lo <= dom.hi);
      }
      if (name == "rank") CHECK(dom.hi <= 39);  // < min dimension
      if (name == "k") CHECK(dom.hi <= 59);
    }
  }
}
