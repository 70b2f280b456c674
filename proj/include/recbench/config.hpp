#pragma once

#include <map>
#include <string>
#include <vector>

#include "recbench/data.hpp"
#include "recbench/params.hpp"

namespace recbench {

struct DatasetConfig {
  std::string name;
  std::string events_path;
  TextTableSpec table;
  double threshold = 4.0;  // mandatory per dataset: non-rating scales differ
  Index h_core = 5;
};

struct ProtocolConfig {
  std::vector<std::string> types = {"strong-gen"};
  std::vector<std::string> models;  // empty = all registered models
  int folds = 5;
  std::uint64_t seed = 42;
  Index top_k = 50;
  Index diversity_k = 10;
  bool subgroups = false;
};

struct HpoConfig {
  int trials = 50;
  std::string strategy = "random";
  std::uint64_t seed = 7;
  bool per_round = true;  // re-search every CV round; false = shared config
};

struct ExperimentConfig {
  DatasetConfig dataset;
  ProtocolConfig protocol;
  HpoConfig hpo;
  std::map<std::string, ParamMap> model_overrides;  // [model.<name>] pins
};

/// Strict INI-style parser: sections [dataset], [protocol], [hpo],
/// [model.<name>]; `key = value` lines; '#' comments. Unknown sections or
/// keys are errors.
ExperimentConfig parseConfigText(const std::string& text);
ExperimentConfig parseConfigFile(const std::string& path);

std::vector<std::string> splitList(const std::string& csv);

}  // namespace recbench
