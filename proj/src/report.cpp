#include "recbench/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include <json.hpp>

namespace recbench {

namespace {

constexpr const char* kCsvMagic = "# recbench report v1";

std::string displayName(const std::string& model) {
  static const std::map<std::string, std::string> names = {
      {"random", "Random"},     {"popularity", "Popularity"},
      {"itemknn", "ItemKNN"},   {"userknn", "UserKNN"},
      {"puresvd", "PureSVD"},   {"als", "ALS"},
      {"ease", "Ease"},         {"slim", "SLIM"},
      {"p3alpha", "P3alpha"},   {"rp3beta", "RP3beta"},
      {"gfcf", "GFCF"},         {"multidae", "MultiDAE"},
      {"multivae", "MultiVAE"}};
  auto it = names.find(model);
  return it == names.end() ? model : it->second;
}

double meanOf(std::span<const double> v) {
  if (v.empty()) return 0;
  return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
}

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

std::vector<MetricReport> buildReports(const ProtocolResult& result,
                                       const std::string& dataset) {
  std::vector<MetricReport> out;
  const bool rerank = result.protocol.rfind("rerank-memo", 0) == 0;
  const std::string util_name =
      (rerank ? "recall@" : "hr@") + std::to_string(result.k);

  // per-round per-user splits
  std::map<int, std::vector<double>> util_by_round, rank_by_round;
  for (std::size_t i = 0; i < result.users.size(); ++i) {
    util_by_round[result.round_of_user[i]].push_back(result.utility[i]);
    rank_by_round[result.round_of_user[i]].push_back(result.rank[i]);
  }
  auto roundMeans = [&](const std::map<int, std::vector<double>>& by_round) {
    std::vector<double> means;
    for (const auto& [round, vals] : by_round) means.push_back(meanOf(vals));
    return means;
  };

  MetricReport util;
  util.model = result.model;
  util.dataset = dataset;
  util.protocol = result.protocol;
  util.metric = util_name;
  util.value = meanOf(result.utility);
  util.ci95 = ci95Proportion(util.value, result.n_fold);
  util.per_fold = roundMeans(util_by_round);
  out.push_back(util);

  MetricReport ranks;
  ranks.model = result.model;
  ranks.dataset = dataset;
  ranks.protocol = result.protocol;
  ranks.metric = "mean_ranks";
  ranks.value = meanOf(result.rank);
  ranks.ci95 = ci95Mean(result.rank, result.n_fold);
  ranks.per_fold = roundMeans(rank_by_round);
  out.push_back(ranks);

  if (result.exposure_topk.size() > 0) {
    std::vector<double> expo(result.exposure_topk.data(),
                             result.exposure_topk.data() +
                                 result.exposure_topk.size());
    MetricReport gini;
    gini.model = result.model;
    gini.dataset = dataset;
    gini.protocol = result.protocol;
    gini.metric = "gini@" + std::to_string(result.diversity_k);
    gini.value = giniIndex(expo);
    gini.ci95 = 0;
    MetricReport entropy = gini;
    entropy.metric = "entropy@" + std::to_string(result.diversity_k);
    entropy.value = shannonEntropy(expo);
    for (const auto& round_expo : result.per_round_exposure) {
      std::vector<double> re(round_expo.data(),
                             round_expo.data() + round_expo.size());
      gini.per_fold.push_back(giniIndex(re));
      entropy.per_fold.push_back(shannonEntropy(re));
    }
    out.push_back(gini);
    out.push_back(entropy);
  }
  return out;
}

void writeCsv(const std::filesystem::path& path, const ReportTable& table) {
  std::ofstream os(path);
  require(os.good(), "cannot write report: " + path.string());
  os << kCsvMagic << "\n";
  os << "protocol,dataset,model,metric,value,ci95,per_fold\n";
  for (const auto& r : table.rows) {
    os << r.protocol << ',' << r.dataset << ',' << r.model << ',' << r.metric
       << ',' << fmt(r.value) << ',' << fmt(r.ci95) << ',';
    for (std::size_t i = 0; i < r.per_fold.size(); ++i) {
      if (i) os << ';';
      os << fmt(r.per_fold[i]);
    }
    os << "\n";
  }
  require(os.good(), "report write failed: " + path.string());
}

ReportTable readCsv(const std::filesystem::path& path) {
  std::ifstream is(path);
  require(is.good(), "cannot open report: " + path.string());
  std::string line;
  std::getline(is, line);
  require(line == kCsvMagic, "not a report file (bad magic): " + path.string());
  std::getline(is, line);  // header
  ReportTable table;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    require(fields.size() >= 6, "corrupt report row: " + line);
    MetricReport r;
    r.protocol = fields[0];
    r.dataset = fields[1];
    r.model = fields[2];
    r.metric = fields[3];
    r.value = std::stod(fields[4]);
    r.ci95 = std::stod(fields[5]);
    if (fields.size() >= 7 && !fields[6].empty()) {
      std::stringstream fs(fields[6]);
      std::string v;
      while (std::getline(fs, v, ';')) r.per_fold.push_back(std::stod(v));
    }
    if (table.rows.empty()) {
      table.protocol = r.protocol;
      table.dataset = r.dataset;
    }
    table.rows.push_back(std::move(r));
  }
  return table;
}

void writeMarkdown(const std::filesystem::path& path,
                   const ReportTable& table) {
  // group rows per model
  std::map<std::string, std::map<std::string, const MetricReport*>> by_model;
  std::set<std::string> metrics;
  for (const auto& r : table.rows) {
    by_model[r.model][r.metric] = &r;
    metrics.insert(r.metric);
  }
  std::string util_metric;
  for (const auto& m : metrics)
    if (m.rfind("hr@", 0) == 0 || m.rfind("recall@", 0) == 0) util_metric = m;

  std::vector<std::string> models;
  for (const auto& [m, _] : by_model) models.push_back(m);
  std::sort(models.begin(), models.end(), [&](const auto& a, const auto& b) {
    const double va = util_metric.empty() ? 0 : by_model[a][util_metric]->value;
    const double vb = util_metric.empty() ? 0 : by_model[b][util_metric]->value;
    return va != vb ? va < vb : a < b;
  });

  std::ofstream os(path);
  require(os.good(), "cannot write report: " + path.string());
  os << "<!-- recbench report v1 -->\n";
  os << "# " << table.protocol << " / " << table.dataset << "\n\n";
  os << "| Model |";
  for (const auto& m : metrics) os << ' ' << m << " | 95% CI |";
  os << "\n|---|";
  for (std::size_t i = 0; i < metrics.size(); ++i) os << "---|---|";
  os << "\n";
  for (const auto& model : models) {
    os << "| " << displayName(model) << " |";
    for (const auto& metric : metrics) {
      auto it = by_model[model].find(metric);
      if (it == by_model[model].end()) {
        os << " - | - |";
      } else {
        char buf[64];
        std::snprintf(buf, sizeof(buf), " %.3f | %.3f |", it->second->value,
                      it->second->ci95);
        os << buf;
      }
    }
    os << "\n";
  }
}

std::vector<double> fractionalRanks(std::span<const double> values,
                                    bool ascending) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ascending ? values[a] < values[b] : values[a] > values[b];
  });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    // tied values share the mean of their positions (1-based)
    const double mean_pos = (double(i + 1) + double(j + 1)) / 2.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = mean_pos;
    i = j + 1;
  }
  return ranks;
}

bool metricAscending(const std::string& metric) {
  if (metric.rfind("hr@", 0) == 0 || metric.rfind("recall@", 0) == 0)
    return false;  // larger is better -> rank 1 = largest
  if (metric.rfind("entropy@", 0) == 0) return false;
  if (metric == "mean_ranks" || metric.rfind("gini@", 0) == 0) return true;
  fail("unknown metric for ranking: " + metric);
}

RankTable aggregateRanks(const std::vector<ReportTable>& tables,
                         const std::string& metric) {
  require(!tables.empty(), "no report tables");
  RankTable out;
  out.metric = metric;
  // model set = intersection-free union; models missing a value error out
  std::set<std::string> model_set;
  for (const auto& t : tables)
    for (const auto& r : t.rows)
      if (r.metric == metric) model_set.insert(r.model);
  require(!model_set.empty(), "metric not present in reports: " + metric);
  out.models.assign(model_set.begin(), model_set.end());

  const bool ascending = metricAscending(metric);
  for (const auto& t : tables) {
    out.datasets.push_back(t.dataset);
    std::vector<double> values;
    for (const auto& model : out.models) {
      const MetricReport* found = nullptr;
      for (const auto& r : t.rows)
        if (r.model == model && r.metric == metric) found = &r;
      require(found != nullptr, "model " + model + " missing from " +
                                    t.dataset + " report");
      values.push_back(found->value);
    }
    auto ranks = fractionalRanks(values, ascending);
    for (std::size_t m = 0; m < out.models.size(); ++m) {
      if (out.rank.size() <= m) out.rank.emplace_back();
      out.rank[m].push_back(ranks[m]);
    }
  }
  for (std::size_t m = 0; m < out.models.size(); ++m)
    out.avg_rank.push_back(meanOf(out.rank[m]));
  return out;
}

void writeRankCsv(const std::filesystem::path& path, const RankTable& table) {
  std::ofstream os(path);
  require(os.good(), "cannot write ranking: " + path.string());
  os << kCsvMagic << "\n";
  os << "model,metric";
  for (const auto& d : table.datasets) os << ',' << d;
  os << ",avg_rank\n";
  // best (lowest average rank) first
  std::vector<std::size_t> order(table.models.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return table.avg_rank[a] != table.avg_rank[b]
               ? table.avg_rank[a] < table.avg_rank[b]
               : table.models[a] < table.models[b];
  });
  for (std::size_t m : order) {
    os << table.models[m] << ',' << table.metric;
    for (double r : table.rank[m]) os << ',' << fmt(r);
    os << ',' << fmt(table.avg_rank[m]) << "\n";
  }
}

void writeRankMarkdown(const std::filesystem::path& path,
                       const RankTable& table) {
  std::ofstream os(path);
  require(os.good(), "cannot write ranking: " + path.string());
  os << "<!-- recbench report v1 -->\n";
  os << "# Average ranking by " << table.metric << "\n\n";
  os << "| Model |";
  for (const auto& d : table.datasets) os << ' ' << d << " |";
  os << " Avg |\n|---|";
  for (std::size_t i = 0; i <= table.datasets.size(); ++i) os << "---|";
  os << "\n";
  std::vector<std::size_t> order(table.models.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return table.avg_rank[a] != table.avg_rank[b]
               ? table.avg_rank[a] < table.avg_rank[b]
               : table.models[a] < table.models[b];
  });
  for (std::size_t m : order) {
    os << "| " << displayName(table.models[m]) << " |";
    char buf[32];
    for (double r : table.rank[m]) {
      std::snprintf(buf, sizeof(buf), " %.1f |", r);
      os << buf;
    }
    std::snprintf(buf, sizeof(buf), " %.2f |", table.avg_rank[m]);
    os << buf << "\n";
  }
}

void writeManifest(const std::filesystem::path& path,
                   const ExperimentConfig& cfg, std::uint64_t config_hash,
                   std::uint64_t snapshot_hash,
                   const std::vector<ManifestEntry>& entries) {
  nlohmann::json j;
  j["format"] = "recbench-manifest-v1";
  j["config_hash"] = hexHash(config_hash);
  j["dataset"] = {{"name", cfg.dataset.name},
                  {"snapshot_hash", hexHash(snapshot_hash)},
                  {"h_core", cfg.dataset.h_core},
                  {"threshold", cfg.dataset.threshold}};
  j["seeds"] = {{"protocol", cfg.protocol.seed}, {"hpo", cfg.hpo.seed}};
  j["hpo"] = {{"trials", cfg.hpo.trials},
              {"strategy", cfg.hpo.strategy},
              {"per_round", cfg.hpo.per_round}};
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& e : entries) {
    nlohmann::json r;
    r["model"] = e.model;
    r["protocol"] = e.protocol;
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [k, v] : e.params) params[k] = toString(v);
    r["params"] = params;
    r["fit_seed"] = e.fit_seed;
    if (std::isfinite(e.objective)) r["validation_objective"] = e.objective;
    runs.push_back(r);
  }
  j["runs"] = runs;
  std::ofstream os(path);
  require(os.good(), "cannot write manifest: " + path.string());
  os << j.dump(2) << "\n";
}

}  // namespace recbench
