#include "recbench/driver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>

namespace recbench {

namespace fs = std::filesystem;

PreparedDataset prepareDataset(const ExperimentConfig& cfg,
                               const fs::path& cache_dir) {
  require(!cfg.dataset.name.empty(), "dataset name missing from config");
  fs::create_directories(cache_dir);
  const fs::path snap_path =
      snapshotPath(cache_dir, cfg.dataset.name, cfg.dataset.h_core,
                   cfg.dataset.threshold, cfg.protocol.seed);
  if (fs::exists(snap_path)) {
    DatasetSnapshot snap = loadSnapshot(snap_path.string());
    return {std::move(snap.interactions), std::move(snap.folds)};
  }
  require(!cfg.dataset.events_path.empty(),
          "dataset events path missing from config");
  RawEvents raw = readEvents(cfg.dataset.events_path, cfg.dataset.table);
  RawEvents positives = binarize(raw, cfg.dataset.threshold);
  Interactions built = buildInteractions(positives);
  Interactions filtered = kcoreFilter(built, cfg.dataset.h_core);
  FoldPlan folds = makeFolds(filtered, cfg.protocol.folds, cfg.protocol.seed);
  saveSnapshot(snap_path.string(), {filtered, folds});
  return {std::move(filtered), std::move(folds)};
}

namespace {

ParamMap overridesFor(const ExperimentConfig& cfg, const std::string& model) {
  auto it = cfg.model_overrides.find(model);
  return it == cfg.model_overrides.end() ? ParamMap{} : it->second;
}

/// Search space minus parameters the config pinned explicitly.
hpo::SearchSpace spaceFor(const ExperimentConfig& cfg,
                          const PreparedDataset& data,
                          const std::string& model) {
  hpo::SearchSpace space = hpo::defaultSearchSpace(
      model, data.interactions.users(), data.interactions.items());
  for (const auto& [key, _] : overridesFor(cfg, model)) space.params.erase(key);
  return space;
}

ParamMap mergeTrial(const ParamMap& pins, const ParamMap& sampled) {
  ParamMap merged = pins;
  for (const auto& [k, v] : sampled) merged[k] = v;
  return merged;
}

double evalHr(const Recommender& model, const EvalSet& eval) {
  auto outcome = evaluateHoldout(model, eval, /*diversity_k=*/1);
  return std::accumulate(outcome.hits.begin(), outcome.hits.end(), 0.0) /
         std::max<std::size_t>(1, outcome.hits.size());
}

}  // namespace

std::vector<std::string> effectiveModels(const ExperimentConfig& cfg) {
  return cfg.protocol.models.empty() ? modelNames() : cfg.protocol.models;
}

TuneResult tuneModel(const ExperimentConfig& cfg, const PreparedDataset& data,
                     const std::string& model, const std::string& protocol,
                     const FitProvider& fit, const fs::path& log_dir) {
  const ParamMap pins = overridesFor(cfg, model);
  hpo::SearchSpace space = spaceFor(cfg, data, model);
  TuneResult out;
  if (space.empty() || cfg.hpo.trials <= 0) {
    out.params_per_round = {pins};
    return out;
  }
  fs::create_directories(log_dir);
  const hpo::Strategy strategy = hpo::strategyFromName(cfg.hpo.strategy);

  auto logPath = [&](int round) {
    return log_dir / (cfg.dataset.name + "-" + protocol + "-" + model +
                      "-round" + std::to_string(round) + ".trials.jsonl");
  };

  if (protocol == "strong-gen" || protocol == "subgroups") {
    std::vector<Index> all_users(data.interactions.users());
    std::iota(all_users.begin(), all_users.end(), 0);
    const HoldoutSet holdouts =
        selectHoldouts(data.interactions, all_users, cfg.protocol.seed);
    const int rounds = cfg.hpo.per_round ? data.folds.n_folds : 1;
    for (int round = 0; round < rounds; ++round) {
      StrongGenRound r = makeStrongGenRound(data.interactions, data.folds,
                                            round, holdouts,
                                            cfg.protocol.top_k);
      hpo::Objective objective = [&](const ParamMap& sampled) {
        FitContext ctx;
        ctx.early_stop = &r.train_probe;
        auto fitted = fit(model, r.train, mergeTrial(pins, sampled),
                          cfg.protocol.seed, ctx);
        return evalHr(*fitted, r.validation);
      };
      auto result =
          hpo::search(space, objective, cfg.hpo.trials, strategy,
                      mix64(cfg.hpo.seed, static_cast<std::uint64_t>(round)),
                      logPath(round).string(), round);
      out.params_per_round.push_back(mergeTrial(pins, result.best.config));
      out.best_objective = result.best.objective;
    }
  } else {
    // Memorization tasks have no validation fold; the search maximizes the
    // task's own recovery metric.
    hpo::Objective objective = [&](const ParamMap& sampled) {
      ProtocolResult r =
          protocol == "loo-memo"
              ? runLooMemorization(data.interactions, model,
                                   mergeTrial(pins, sampled),
                                   cfg.protocol.seed, cfg.protocol.top_k, 1,
                                   fit)
              : runRerankMemorization(data.interactions, model,
                                      mergeTrial(pins, sampled),
                                      cfg.protocol.seed, cfg.protocol.top_k, 1,
                                      fit);
      return std::accumulate(r.utility.begin(), r.utility.end(), 0.0) /
             std::max<std::size_t>(1, r.utility.size());
    };
    auto result = hpo::search(space, objective, cfg.hpo.trials, strategy,
                              cfg.hpo.seed, logPath(0).string(), 0);
    out.params_per_round = {mergeTrial(pins, result.best.config)};
    out.best_objective = result.best.objective;
  }
  return out;
}

namespace {

/// Strong-generalization subgroup analysis: per-round partitions of the test
/// fold, restricted metrics aggregated across rounds.
std::vector<ProtocolResult> subgroupResults(const ExperimentConfig& cfg,
                                            const PreparedDataset& data,
                                            const ProtocolResult& full) {
  std::vector<Index> all_users(data.interactions.users());
  std::iota(all_users.begin(), all_users.end(), 0);
  const HoldoutSet holdouts =
      selectHoldouts(data.interactions, all_users, cfg.protocol.seed);

  std::map<std::string, SubgroupPartition> merged;
  for (int round = 0; round < data.folds.n_folds; ++round) {
    StrongGenRound r = makeStrongGenRound(data.interactions, data.folds, round,
                                          holdouts, cfg.protocol.top_k);
    auto [active, inactive] =
        partitionActiveInactive(data.interactions, r.test_users);
    auto [similar, dissimilar] = partitionSimilarDissimilar(
        r.test.histories, r.test_users, r.train, /*l=*/10);
    auto [head, tail] =
        partitionHeadTail(data.interactions, r.test_users, holdouts);
    for (const auto& part :
         {active, inactive, similar, dissimilar, head, tail}) {
      auto& slot = merged[part.label];
      slot.label = part.label;
      slot.users.insert(slot.users.end(), part.users.begin(),
                        part.users.end());
      slot.info = part.info;
    }
  }
  std::vector<ProtocolResult> out;
  for (const auto* label :
       {"active", "inactive", "similar", "dissimilar", "head", "tail"}) {
    out.push_back(restrictToSubgroup(full, merged[label]));
    out.back().protocol = std::string("subgroups-") + label;
  }
  return out;
}

}  // namespace

ExperimentArtifacts runExperiment(const ExperimentConfig& cfg,
                                  const PreparedDataset& data,
                                  const fs::path& cache_dir, bool with_hpo,
                                  const fs::path& log_dir) {
  const bool want_subgroups =
      std::find(cfg.protocol.types.begin(), cfg.protocol.types.end(),
                "subgroups") != cfg.protocol.types.end();
  require(!want_subgroups ||
              std::find(cfg.protocol.types.begin(), cfg.protocol.types.end(),
                        "strong-gen") != cfg.protocol.types.end(),
          "subgroups protocol requires strong-gen");

  const FitProvider fit = cachingFitter(cache_dir);
  const std::vector<std::string> models = effectiveModels(cfg);

  ExperimentArtifacts art;
  std::map<std::string, ReportTable> tables;

  for (const auto& protocol : cfg.protocol.types) {
    if (protocol == "subgroups") continue;  // derived from strong-gen below
    for (const auto& model : models) {
      TuneResult tuned =
          with_hpo ? tuneModel(cfg, data, model, protocol, fit, log_dir)
                   : TuneResult{{overridesFor(cfg, model)},
                                std::numeric_limits<double>::quiet_NaN()};
      ProtocolResult result =
          protocol == "strong-gen"
              ? runStrongGeneralization(data.interactions, data.folds, model,
                                        tuned.params_per_round,
                                        cfg.protocol.seed, cfg.protocol.top_k,
                                        cfg.protocol.diversity_k, fit)
          : protocol == "loo-memo"
              ? runLooMemorization(data.interactions, model,
                                   tuned.params_per_round[0],
                                   cfg.protocol.seed, cfg.protocol.top_k,
                                   cfg.protocol.diversity_k, fit)
              : runRerankMemorization(data.interactions, model,
                                      tuned.params_per_round[0],
                                      cfg.protocol.seed, cfg.protocol.top_k,
                                      cfg.protocol.diversity_k, fit);
      for (auto& report : buildReports(result, cfg.dataset.name)) {
        auto& table = tables[result.protocol];
        table.protocol = result.protocol;
        table.dataset = cfg.dataset.name;
        table.rows.push_back(std::move(report));
      }
      ManifestEntry entry;
      entry.model = model;
      entry.protocol = protocol;
      entry.params = mergeParams(modelInfo(model).defaults,
                                 tuned.params_per_round[0], model);
      entry.fit_seed = cfg.protocol.seed;
      entry.objective = tuned.best_objective;
      art.manifest.push_back(entry);

      if (protocol == "strong-gen" && want_subgroups) {
        for (auto& sub : subgroupResults(cfg, data, result)) {
          for (auto& report : buildReports(sub, cfg.dataset.name)) {
            auto& table = tables[sub.protocol];
            table.protocol = sub.protocol;
            table.dataset = cfg.dataset.name;
            table.rows.push_back(std::move(report));
          }
        }
      }
    }
  }
  for (auto& [name, table] : tables) art.tables.push_back(std::move(table));
  return art;
}

std::vector<fs::path> writeArtifacts(const ExperimentArtifacts& artifacts,
                                     const ExperimentConfig& cfg,
                                     std::uint64_t snapshot_hash,
                                     const fs::path& out_dir) {
  fs::create_directories(out_dir);
  std::vector<fs::path> written;
  for (const auto& table : artifacts.tables) {
    const std::string stem = table.protocol + "_" + table.dataset;
    const fs::path csv = out_dir / (stem + ".csv");
    const fs::path md = out_dir / (stem + ".md");
    writeCsv(csv, table);
    writeMarkdown(md, table);
    written.push_back(csv);
    written.push_back(md);
  }
  std::uint64_t config_hash = fnv1a(cfg.dataset.name);
  config_hash = fnv1a(std::to_string(cfg.protocol.seed), config_hash);
  config_hash = fnv1a(std::to_string(cfg.hpo.seed), config_hash);
  config_hash = fnv1a(std::to_string(cfg.hpo.trials), config_hash);
  const fs::path manifest =
      out_dir / ("manifest_" + cfg.dataset.name + ".json");
  writeManifest(manifest, cfg, config_hash, snapshot_hash, artifacts.manifest);
  written.push_back(manifest);
  return written;
}

}  // namespace recbench
