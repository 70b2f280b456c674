#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "recbench/driver.hpp"

namespace fs = std::filesystem;
using namespace recbench;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string dataset;
  std::string models_csv;
  std::string protocol;
  std::int64_t seed = -1;
  int folds = -1;
  std::string out_dir = "out";
  unsigned jobs = 0;
};

void addCommon(CLI::App* cmd, CommonArgs& args, bool needs_config = true) {
  auto* opt = cmd->add_option("--config", args.config_path,
                              "experiment config file (INI sections)");
  if (needs_config) opt->required();
  cmd->add_option("--dataset", args.dataset, "dataset name override");
  cmd->add_option("--models", args.models_csv,
                  "comma-separated model list override");
  cmd->add_option("--protocol", args.protocol,
                  "protocol override (strong-gen|loo-memo|rerank-memo|subgroups)");
  cmd->add_option("--seed", args.seed, "protocol seed override");
  cmd->add_option("--folds", args.folds, "fold count override");
  cmd->add_option("--out-dir", args.out_dir, "output directory");
  cmd->add_option("--jobs", args.jobs, "worker threads (0 = hardware)");
}

ExperimentConfig loadConfig(const CommonArgs& args) {
  ExperimentConfig cfg = parseConfigFile(args.config_path);
  if (!args.dataset.empty()) cfg.dataset.name = args.dataset;
  if (!args.models_csv.empty()) {
    cfg.protocol.models = splitList(args.models_csv);
    for (const auto& m : cfg.protocol.models)
      require(isModelName(m), "unknown model '" + m + "'");
  }
  if (!args.protocol.empty()) {
    cfg.protocol.types = splitList(args.protocol);
    for (const auto& t : cfg.protocol.types) {
      const bool known = t == "strong-gen" || t == "loo-memo" ||
                         t == "rerank-memo" || t == "subgroups";
      require(known, "unknown protocol '" + t + "'");
    }
  }
  if (args.seed >= 0) cfg.protocol.seed = static_cast<std::uint64_t>(args.seed);
  if (args.folds >= 2) cfg.protocol.folds = args.folds;
  if (args.jobs > 0) setWorkerCount(args.jobs);
  return cfg;
}

void printStats(const ExperimentConfig& cfg, const PreparedDataset& data) {
  const auto& m = data.interactions.matrix;
  const double sparsity =
      static_cast<double>(m.nonZeros()) /
      (static_cast<double>(m.rows()) * static_cast<double>(m.cols()));
  std::printf("dataset %s: %d users, %d items, %lld interactions\n",
              cfg.dataset.name.c_str(), m.rows(), m.cols(),
              static_cast<long long>(m.nonZeros()));
  std::printf("  sparsity %.3e | per-user %.1f | per-item %.1f | folds %d\n",
              sparsity,
              static_cast<double>(m.nonZeros()) / m.rows(),
              static_cast<double>(m.nonZeros()) / m.cols(),
              data.folds.n_folds);
}

int withErrorsReported(const std::function<int()>& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"implicit-feedback top-n recommender benchmark"};
  app.require_subcommand(1);

  CommonArgs args;

  auto* prepare = app.add_subcommand(
      "prepare", "ingest, binarize, h-core filter and split a dataset");
  addCommon(prepare, args);

  auto* fit = app.add_subcommand(
      "fit", "fit models on the full dataset and store them in the cache");
  addCommon(fit, args);

  auto* evaluate = app.add_subcommand(
      "evaluate", "run protocols with pinned/default hyper-parameters");
  addCommon(evaluate, args);

  auto* hpo_cmd = app.add_subcommand(
      "hpo", "hyper-parameter search; writes trial logs and best configs");
  addCommon(hpo_cmd, args);

  auto* report = app.add_subcommand(
      "report", "full pipeline: prepare, search, evaluate, write tables");
  addCommon(report, args);

  auto* rank = app.add_subcommand(
      "rank", "aggregate rankings across dataset report CSVs");
  std::vector<std::string> rank_inputs;
  std::string rank_metric = "hr@50";
  std::string rank_out = "out";
  rank->add_option("--inputs", rank_inputs, "report CSV files")
      ->required()
      ->expected(-1);
  rank->add_option("--metric", rank_metric, "metric column to rank on");
  rank->add_option("--out-dir", rank_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  return withErrorsReported([&]() -> int {
    if (rank->parsed()) {
      std::vector<ReportTable> tables;
      for (const auto& input : rank_inputs) tables.push_back(readCsv(input));
      RankTable table = aggregateRanks(tables, rank_metric);
      fs::create_directories(rank_out);
      const fs::path csv = fs::path(rank_out) / ("rank_" + rank_metric + ".csv");
      const fs::path md = fs::path(rank_out) / ("rank_" + rank_metric + ".md");
      writeRankCsv(csv, table);
      writeRankMarkdown(md, table);
      std::printf("wrote %s\n", csv.string().c_str());
      return 0;
    }

    ExperimentConfig cfg = loadConfig(args);
    const fs::path out_dir = args.out_dir;
    const fs::path cache = cacheDir(out_dir);
    const fs::path log_dir = out_dir / "hpo";

    PreparedDataset data = prepareDataset(cfg, cache);
    if (prepare->parsed()) {
      printStats(cfg, data);
      return 0;
    }

    if (fit->parsed()) {
      const FitProvider fitter = cachingFitter(cache);
      for (const auto& model : effectiveModels(cfg)) {
        auto it = cfg.model_overrides.find(model);
        ParamMap overrides =
            it == cfg.model_overrides.end() ? ParamMap{} : it->second;
        auto fitted =
            fitter(model, data.interactions.matrix, overrides,
                   cfg.protocol.seed, FitContext{});
        std::printf("fitted %-10s (cache key %s)\n", model.c_str(),
                    modelCacheKey(data.interactions.matrix.contentHash(),
                                  model,
                                  mergeParams(modelInfo(model).defaults,
                                              overrides, model),
                                  cfg.protocol.seed)
                        .c_str());
      }
      return 0;
    }

    if (hpo_cmd->parsed()) {
      const FitProvider fitter = cachingFitter(cache);
      nlohmann::json best = nlohmann::json::object();
      for (const auto& protocol : cfg.protocol.types) {
        if (protocol == "subgroups") continue;
        for (const auto& model : effectiveModels(cfg)) {
          TuneResult tuned =
              tuneModel(cfg, data, model, protocol, fitter, log_dir);
          nlohmann::json rounds = nlohmann::json::array();
          for (const auto& params : tuned.params_per_round) {
            nlohmann::json p = nlohmann::json::object();
            for (const auto& [k, v] : params) p[k] = toString(v);
            rounds.push_back(p);
          }
          best[protocol][model] = {{"rounds", rounds},
                                   {"objective", tuned.best_objective}};
          std::printf("tuned %-10s %-12s best objective %.4f\n", model.c_str(),
                      protocol.c_str(), tuned.best_objective);
        }
      }
      fs::create_directories(out_dir);
      std::ofstream os(out_dir / ("best_configs_" + cfg.dataset.name + ".json"));
      os << best.dump(2) << "\n";
      return 0;
    }

    const bool with_hpo = report->parsed();
    ExperimentArtifacts art =
        runExperiment(cfg, data, cache, with_hpo, log_dir);
    auto written = writeArtifacts(art, cfg,
                                  data.interactions.contentHash(), out_dir);
    for (const auto& p : written)
      std::printf("wrote %s\n", p.string().c_str());
    return 0;
  });
}
