#pragma once

#include <functional>
#include <map>
#include <optional>

#include "recbench/params.hpp"
#include "recbench/sparse.hpp"

namespace recbench::hpo {

struct Domain {
  enum class Kind { Real, LogReal, Int, LogInt, Categorical };
  Kind kind = Kind::Real;
  double lo = 0;
  double hi = 0;
  std::vector<ParamValue> choices;

  static Domain real(double lo, double hi) {
    return {Kind::Real, lo, hi, {}};
  }
  static Domain logReal(double lo, double hi) {
    return {Kind::LogReal, lo, hi, {}};
  }
  static Domain intRange(std::int64_t lo, std::int64_t hi) {
    return {Kind::Int, double(lo), double(hi), {}};
  }
  static Domain logInt(std::int64_t lo, std::int64_t hi) {
    return {Kind::LogInt, double(lo), double(hi), {}};
  }
  static Domain categorical(std::vector<ParamValue> choices) {
    return {Kind::Categorical, 0, 0, std::move(choices)};
  }
};

struct SearchSpace {
  std::string model;
  std::map<std::string, Domain> params;  // sorted: sampling order is stable

  bool empty() const { return params.empty(); }
};

struct Trial {
  int index = -1;
  ParamMap config;
  double objective = 0;
  bool ok = false;
  std::string error;
  int fold = -1;
  std::uint64_t seed = 0;
  double wall_seconds = 0;
};

struct SearchResult {
  Trial best;
  std::vector<Trial> history;
};

using Objective = std::function<double(const ParamMap&)>;

enum class Strategy { Random, Tpe };

Strategy strategyFromName(const std::string& name);
std::string strategyName(Strategy s);

/// Maximizes fn over the space. Deterministic under (seed, strategy).
/// Random strategy evaluates trials on the worker pool; the tpe-style
/// sampler is sequential (each proposal conditions on the history).
/// Failed trials are logged and skipped; if every trial fails the error
/// summarizes the log. When log_path is set, one JSON line per trial is
/// appended.
SearchResult search(const SearchSpace& space, const Objective& fn,
                    int n_trials, Strategy strategy, std::uint64_t seed,
                    const std::string& log_path = "", int fold = -1);

/// Re-derives the best trial from a log written by search().
SearchResult replayLog(const std::string& log_path);

/// Shipped per-model search spaces; bounds capped by the dataset shape.
SearchSpace defaultSearchSpace(const std::string& model, Index n_users,
                               Index n_items);

}  // namespace recbench::hpo
