#include "recbench/hpo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>

#include <json.hpp>

#include "recbench/common.hpp"

namespace recbench::hpo {

Strategy strategyFromName(const std::string& name) {
  if (name == "random") return Strategy::Random;
  if (name == "tpe") return Strategy::Tpe;
  fail("unknown search strategy: " + name);
}

std::string strategyName(Strategy s) {
  return s == Strategy::Random ? "random" : "tpe";
}

namespace {

using nlohmann::json;

double toUnit(const Domain& d, double value) {
  switch (d.kind) {
    case Domain::Kind::Real:
    case Domain::Kind::Int:
      return (value - d.lo) / (d.hi - d.lo);
    case Domain::Kind::LogReal:
    case Domain::Kind::LogInt:
      return (std::log(value) - std::log(d.lo)) /
             (std::log(d.hi) - std::log(d.lo));
    case Domain::Kind::Categorical:
      return 0;
  }
  return 0;
}

ParamValue fromUnit(const Domain& d, double unit) {
  unit = std::clamp(unit, 0.0, 1.0);
  switch (d.kind) {
    case Domain::Kind::Real:
      return d.lo + unit * (d.hi - d.lo);
    case Domain::Kind::LogReal:
      return std::exp(std::log(d.lo) + unit * (std::log(d.hi) - std::log(d.lo)));
    case Domain::Kind::Int: {
      double v = d.lo + unit * (d.hi - d.lo);
      return static_cast<std::int64_t>(std::llround(
          std::clamp(v, d.lo, d.hi)));
    }
    case Domain::Kind::LogInt: {
      double v =
          std::exp(std::log(d.lo) + unit * (std::log(d.hi) - std::log(d.lo)));
      return static_cast<std::int64_t>(std::llround(std::clamp(v, d.lo, d.hi)));
    }
    case Domain::Kind::Categorical:
      break;
  }
  fail("fromUnit on a categorical domain");
}

ParamMap sampleConfig(const SearchSpace& space, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ParamMap config;
  for (const auto& [name, dom] : space.params) {
    if (dom.kind == Domain::Kind::Categorical) {
      std::uniform_int_distribution<std::size_t> pick(0, dom.choices.size() - 1);
      config[name] = dom.choices[pick(rng)];
    } else {
      config[name] = fromUnit(dom, u(rng));
    }
  }
  return config;
}

json paramValueToJson(const ParamValue& v) {
  if (std::holds_alternative<bool>(v)) return std::get<bool>(v);
  if (std::holds_alternative<std::int64_t>(v)) return std::get<std::int64_t>(v);
  if (std::holds_alternative<double>(v)) return std::get<double>(v);
  return std::get<std::string>(v);
}

ParamValue paramValueFromJson(const json& j) {
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number_float()) return j.get<double>();
  return j.get<std::string>();
}

void appendLog(std::ofstream& log, const Trial& t) {
  if (!log.is_open()) return;
  json j;
  j["trial"] = t.index;
  json cfg = json::object();
  for (const auto& [k, v] : t.config) cfg[k] = paramValueToJson(v);
  j["config"] = cfg;
  j["objective"] = t.objective;
  j["ok"] = t.ok;
  if (!t.ok) j["error"] = t.error;
  j["fold"] = t.fold;
  j["seed"] = t.seed;
  j["wall_seconds"] = t.wall_seconds;
  log << j.dump() << "\n";
  log.flush();
}

Trial runTrial(const Objective& fn, ParamMap config, int index,
               std::uint64_t seed, int fold) {
  Trial t;
  t.index = index;
  t.config = std::move(config);
  t.seed = seed;
  t.fold = fold;
  const auto start = std::chrono::steady_clock::now();
  try {
    t.objective = fn(t.config);
    t.ok = true;
  } catch (const std::exception& e) {
    t.ok = false;
    t.error = e.what();
    t.objective = -std::numeric_limits<double>::infinity();
  }
  t.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return t;
}

/// Density-ratio proposal for one numeric parameter: kernel density of the
/// good trials over the bad, evaluated on candidate draws from the good
/// mixture (a tpe-style sampler).
double proposeNumeric(const Domain& dom, const std::vector<double>& good,
                      const std::vector<double>& bad, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (good.empty()) return u(rng);
  const double bandwidth =
      std::max(0.05, 1.0 / std::sqrt(static_cast<double>(good.size()) + 1.0));
  auto density = [&](const std::vector<double>& pts, double x) {
    // uniform prior mixed in so the ratio stays finite
    double acc = 1.0;
    for (double p : pts) {
      const double z = (x - p) / bandwidth;
      acc += std::exp(-0.5 * z * z);
    }
    return acc / (static_cast<double>(pts.size()) + 1.0);
  };
  std::normal_distribution<double> kernel(0.0, bandwidth);
  double best_x = 0, best_ratio = -1;
  constexpr int kCandidates = 24;
  for (int c = 0; c < kCandidates; ++c) {
    std::uniform_int_distribution<std::size_t> pick(0, good.size() - 1);
    double x = std::clamp(good[pick(rng)] + kernel(rng), 0.0, 1.0);
    const double ratio = density(good, x) / density(bad, x);
    if (ratio > best_ratio) {
      best_ratio = ratio;
      best_x = x;
    }
  }
  (void)dom;
  return best_x;
}

ParamMap proposeTpe(const SearchSpace& space, const std::vector<Trial>& history,
                    std::mt19937_64& rng) {
  std::vector<const Trial*> ok;
  for (const auto& t : history)
    if (t.ok) ok.push_back(&t);
  if (ok.empty()) return sampleConfig(space, rng);
  std::vector<const Trial*> sorted = ok;
  std::sort(sorted.begin(), sorted.end(), [](const Trial* a, const Trial* b) {
    return a->objective != b->objective ? a->objective > b->objective
                                        : a->index < b->index;
  });
  const std::size_t n_good =
      std::max<std::size_t>(1, sorted.size() / 4);  // top quarter
  ParamMap config;
  for (const auto& [name, dom] : space.params) {
    if (dom.kind == Domain::Kind::Categorical) {
      // smoothed counts in the good set
      std::vector<double> weight(dom.choices.size(), 1.0);
      for (std::size_t i = 0; i < n_good; ++i) {
        const auto& v = sorted[i]->config.at(name);
        for (std::size_t c = 0; c < dom.choices.size(); ++c)
          if (toString(dom.choices[c]) == toString(v)) weight[c] += 1.0;
      }
      std::discrete_distribution<std::size_t> pick(weight.begin(), weight.end());
      config[name] = dom.choices[pick(rng)];
    } else {
      std::vector<double> good, bad;
      for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double unit = toUnit(dom, getReal(sorted[i]->config, name));
        (i < n_good ? good : bad).push_back(unit);
      }
      config[name] = fromUnit(dom, proposeNumeric(dom, good, bad, rng));
    }
  }
  return config;
}

Trial pickBest(const std::vector<Trial>& history) {
  const Trial* best = nullptr;
  for (const auto& t : history) {
    if (!t.ok) continue;
    if (!best || t.objective > best->objective) best = &t;
  }
  require(best != nullptr, "all trials failed");
  return *best;
}

}  // namespace

SearchResult search(const SearchSpace& space, const Objective& fn,
                    int n_trials, Strategy strategy, std::uint64_t seed,
                    const std::string& log_path, int fold) {
  require(n_trials >= 1, "n_trials must be >= 1");
  std::ofstream log;
  if (!log_path.empty()) {
    log.open(log_path, std::ios::app);
    require(log.good(), "cannot open trial log: " + log_path);
  }

  std::vector<Trial> history;
  history.reserve(n_trials);

  if (strategy == Strategy::Random || space.empty()) {
    // Configs depend only on (seed, index): trials can run on the pool and
    // still reproduce bit for bit.
    std::vector<ParamMap> configs(n_trials);
    for (int i = 0; i < n_trials; ++i) {
      std::mt19937_64 rng(mix64(seed, static_cast<std::uint64_t>(i), 0x5ea4c4u));
      configs[i] = sampleConfig(space, rng);
    }
    std::vector<Trial> slots(n_trials);
    parallelFor(0, n_trials, [&](Index i) {
      slots[i] = runTrial(fn, configs[i], static_cast<int>(i), seed, fold);
    });
    for (auto& t : slots) {
      appendLog(log, t);
      history.push_back(std::move(t));
    }
  } else {
    constexpr int kStartupTrials = 15;
    std::mt19937_64 rng(mix64(seed, 0x79eu));
    for (int i = 0; i < n_trials; ++i) {
      ParamMap config = (static_cast<int>(history.size()) < kStartupTrials)
                            ? sampleConfig(space, rng)
                            : proposeTpe(space, history, rng);
      Trial t = runTrial(fn, std::move(config), i, seed, fold);
      appendLog(log, t);
      history.push_back(std::move(t));
    }
  }

  SearchResult out;
  try {
    out.best = pickBest(history);
  } catch (const Error&) {
    std::string summary = "all trials failed";
    if (!history.empty()) summary += "; first error: " + history.front().error;
    if (!log_path.empty()) summary += " (log: " + log_path + ")";
    fail(summary);
  }
  out.history = std::move(history);
  return out;
}

SearchResult replayLog(const std::string& log_path) {
  std::ifstream in(log_path);
  require(in.good(), "cannot open trial log: " + log_path);
  SearchResult out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    Trial t;
    t.index = j.at("trial").get<int>();
    for (const auto& [k, v] : j.at("config").items())
      t.config[k] = paramValueFromJson(v);
    t.objective = j.at("objective").get<double>();
    t.ok = j.at("ok").get<bool>();
    if (!t.ok && j.contains("error")) t.error = j.at("error").get<std::string>();
    t.fold = j.at("fold").get<int>();
    t.seed = j.at("seed").get<std::uint64_t>();
    t.wall_seconds = j.at("wall_seconds").get<double>();
    out.history.push_back(std::move(t));
  }
  require(!out.history.empty(), "empty trial log: " + log_path);
  out.best = pickBest(out.history);
  return out;
}

SearchSpace defaultSearchSpace(const std::string& model, Index n_users,
                               Index n_items) {
  const std::int64_t min_dim = std::min(n_users, n_items);
  const std::int64_t max_rank = std::max<std::int64_t>(2, min_dim - 1);
  const std::int64_t max_k = std::max<std::int64_t>(2, n_items - 1);
  const std::int64_t max_uk = std::max<std::int64_t>(2, n_users - 1);
  SearchSpace s;
  s.model = model;
  if (model == "random" || model == "popularity") return s;
  if (model == "itemknn") {
    s.params["k"] = Domain::logInt(std::min<std::int64_t>(5, max_k),
                                   std::min<std::int64_t>(1000, max_k));
    s.params["shrinkage"] = Domain::real(0.0, 1000.0);
    s.params["normalize"] = Domain::categorical({false, true});
    return s;
  }
  if (model == "userknn") {
    s.params["k"] = Domain::logInt(std::min<std::int64_t>(5, max_uk),
                                   std::min<std::int64_t>(1000, max_uk));
    s.params["shrinkage"] = Domain::real(0.0, 1000.0);
    s.params["normalize"] = Domain::categorical({false, true});
    return s;
  }
  if (model == "puresvd") {
    s.params["rank"] = Domain::logInt(std::min<std::int64_t>(8, max_rank),
                                      std::min<std::int64_t>(512, max_rank));
    return s;
  }
  if (model == "als") {
    s.params["rank"] = Domain::logInt(std::min<std::int64_t>(8, max_rank),
                                      std::min<std::int64_t>(256, max_rank));
    s.params["reg"] = Domain::logReal(1e-3, 1e2);
    s.params["alpha"] = Domain::logReal(0.1, 100.0);
    return s;
  }
  if (model == "ease") {
    s.params["l2"] = Domain::logReal(1.0, 1e4);
    return s;
  }
  if (model == "slim") {
    s.params["l1"] = Domain::logReal(1e-3, 10.0);
    s.params["l2"] = Domain::logReal(1e-2, 100.0);
    s.params["nonneg"] = Domain::categorical({true, false});
    return s;
  }
  if (model == "p3alpha") {
    s.params["alpha"] = Domain::real(0.3, 2.0);
    s.params["topk"] = Domain::logInt(std::min<std::int64_t>(5, max_k),
                                      std::min<std::int64_t>(1000, n_items));
    return s;
  }
  if (model == "rp3beta") {
    s.params["alpha"] = Domain::real(0.3, 2.0);
    s.params["beta"] = Domain::real(0.0, 1.5);
    s.params["topk"] = Domain::logInt(std::min<std::int64_t>(5, max_k),
                                      std::min<std::int64_t>(1000, n_items));
    return s;
  }
  if (model == "gfcf") {
    s.params["filter_alpha"] = Domain::real(0.0, 1.0);
    s.params["rank"] = Domain::logInt(std::min<std::int64_t>(8, max_rank),
                                      std::min<std::int64_t>(512, max_rank));
    return s;
  }
  if (model == "multidae" || model == "multivae") {
    s.params["dropout"] = Domain::real(0.1, 0.8);
    s.params["lr"] = Domain::logReal(1e-4, 1e-2);
    s.params["weight_decay"] = Domain::logReal(1e-8, 1e-3);
    if (model == "multivae") {
      s.params["beta_cap"] = Domain::real(0.0, 1.0);
      s.params["anneal_steps"] = Domain::logInt(100, 10000);
    }
    return s;
  }
  fail("no search space for model: " + model);
}

}  // namespace recbench::hpo
