#include "recbench/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "recbench/recommender.hpp"

namespace recbench {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

char delimiterFromName(const std::string& name) {
  if (name == "tab") return '\t';
  if (name == "comma") return ',';
  if (name == "space") return ' ';
  if (name == "semicolon") return ';';
  if (name == "pipe") return '|';
  fail("unknown delimiter '" + name + "' (tab|comma|space|semicolon|pipe)");
}

void applyColumns(TextTableSpec& table, const std::string& value) {
  table.user_col = table.item_col = table.value_col = table.timestamp_col = -1;
  int pos = 0;
  for (const auto& field : splitList(value)) {
    if (field == "user") table.user_col = pos;
    else if (field == "item") table.item_col = pos;
    else if (field == "value") table.value_col = pos;
    else if (field == "timestamp") table.timestamp_col = pos;
    else if (field == "skip") { /* ignored column */ }
    else fail("unknown column name '" + field + "'");
    ++pos;
  }
  require(table.user_col >= 0 && table.item_col >= 0,
          "columns must include user and item");
}

std::int64_t parseInt(const std::string& key, const std::string& value) {
  ParamValue v = parseParamValue(value);
  require(std::holds_alternative<std::int64_t>(v),
          "key '" + key + "' expects an integer, got '" + value + "'");
  return std::get<std::int64_t>(v);
}

double parseRealValue(const std::string& key, const std::string& value) {
  ParamValue v = parseParamValue(value);
  if (std::holds_alternative<std::int64_t>(v))
    return static_cast<double>(std::get<std::int64_t>(v));
  require(std::holds_alternative<double>(v),
          "key '" + key + "' expects a number, got '" + value + "'");
  return std::get<double>(v);
}

bool parseBool(const std::string& key, const std::string& value) {
  if (value == "true") return true;
  if (value == "false") return false;
  fail("key '" + key + "' expects true/false, got '" + value + "'");
}

}  // namespace

std::vector<std::string> splitList(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

ExperimentConfig parseConfigText(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string at = "config line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      require(line.back() == ']', at + "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      const bool known = section == "dataset" || section == "protocol" ||
                         section == "hpo" || section.starts_with("model.");
      require(known, at + "unknown section [" + section + "]");
      if (section.starts_with("model.")) {
        const std::string model = section.substr(6);
        require(isModelName(model), at + "unknown model '" + model + "'");
        cfg.model_overrides[model];  // section may be empty
      }
      continue;
    }
    const auto eq = line.find('=');
    require(eq != std::string::npos, at + "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    require(!section.empty(), at + "key outside any section");
    require(!key.empty() && !value.empty(), at + "empty key or value");

    if (section == "dataset") {
      if (key == "name") cfg.dataset.name = value;
      else if (key == "events") cfg.dataset.events_path = value;
      else if (key == "delimiter") cfg.dataset.table.delimiter = delimiterFromName(value);
      else if (key == "columns") applyColumns(cfg.dataset.table, value);
      else if (key == "header_lines") cfg.dataset.table.header_lines = static_cast<int>(parseInt(key, value));
      else if (key == "threshold") cfg.dataset.threshold = parseRealValue(key, value);
      else if (key == "h_core") cfg.dataset.h_core = static_cast<Index>(parseInt(key, value));
      else fail(at + "unknown key '" + key + "' in [dataset]");
    } else if (section == "protocol") {
      if (key == "types") cfg.protocol.types = splitList(value);
      else if (key == "models") cfg.protocol.models = splitList(value);
      else if (key == "folds") cfg.protocol.folds = static_cast<int>(parseInt(key, value));
      else if (key == "seed") cfg.protocol.seed = static_cast<std::uint64_t>(parseInt(key, value));
      else if (key == "top_k") cfg.protocol.top_k = static_cast<Index>(parseInt(key, value));
      else if (key == "diversity_k") cfg.protocol.diversity_k = static_cast<Index>(parseInt(key, value));
      else if (key == "subgroups") cfg.protocol.subgroups = parseBool(key, value);
      else fail(at + "unknown key '" + key + "' in [protocol]");
    } else if (section == "hpo") {
      if (key == "trials") cfg.hpo.trials = static_cast<int>(parseInt(key, value));
      else if (key == "strategy") cfg.hpo.strategy = value;
      else if (key == "seed") cfg.hpo.seed = static_cast<std::uint64_t>(parseInt(key, value));
      else if (key == "per_round") cfg.hpo.per_round = parseBool(key, value);
      else fail(at + "unknown key '" + key + "' in [hpo]");
    } else {
      const std::string model = section.substr(6);
      const ModelInfo& info = modelInfo(model);
      auto it = info.defaults.find(key);
      require(it != info.defaults.end(),
              at + "unknown parameter '" + key + "' for model " + model);
      ParamValue parsed = parseParamValue(value);
      // coerce ints written as "5" into real-typed parameters
      if (std::holds_alternative<double>(it->second) &&
          std::holds_alternative<std::int64_t>(parsed))
        parsed = static_cast<double>(std::get<std::int64_t>(parsed));
      require(parsed.index() == it->second.index(),
              at + "parameter '" + key + "' has the wrong type");
      cfg.model_overrides[model][key] = parsed;
    }
  }

  for (const auto& type : cfg.protocol.types) {
    const bool known = type == "strong-gen" || type == "loo-memo" ||
                       type == "rerank-memo" || type == "subgroups";
    require(known, "unknown protocol '" + type + "'");
  }
  for (const auto& model : cfg.protocol.models)
    require(isModelName(model), "unknown model '" + model + "'");
  require(cfg.protocol.folds >= 2, "folds must be >= 2");
  return cfg;
}

ExperimentConfig parseConfigFile(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open config: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parseConfigText(buf.str());
}

}  // namespace recbench
