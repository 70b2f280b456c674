#pragma once

#include <filesystem>

#include "recbench/cache.hpp"
#include "recbench/config.hpp"
#include "recbench/hpo.hpp"
#include "recbench/report.hpp"

namespace recbench {

struct PreparedDataset {
  Interactions interactions;
  FoldPlan folds;
};

/// Ingest + binarize + h-core + fold split, satisfied from the snapshot
/// cache when the (dataset, h, threshold, seed) key matches.
PreparedDataset prepareDataset(const ExperimentConfig& cfg,
                               const std::filesystem::path& cache_dir);

/// Per-round best configs for one model under one protocol.
/// strong-gen tunes on the validation fold's HitRate@k; the memorization
/// tasks tune on their own recovery metric (they have no validation split).
/// Models with an empty search space skip straight to their defaults.
struct TuneResult {
  std::vector<ParamMap> params_per_round;  // size folds, or 1 when shared
  double best_objective = std::numeric_limits<double>::quiet_NaN();
};

TuneResult tuneModel(const ExperimentConfig& cfg, const PreparedDataset& data,
                     const std::string& model, const std::string& protocol,
                     const FitProvider& fit,
                     const std::filesystem::path& log_dir);

struct ExperimentArtifacts {
  std::vector<ReportTable> tables;
  std::vector<ManifestEntry> manifest;
};

/// Full protocol matrix for the configured models. with_hpo=false skips the
/// search and uses defaults + [model.*] pins.
ExperimentArtifacts runExperiment(const ExperimentConfig& cfg,
                                  const PreparedDataset& data,
                                  const std::filesystem::path& cache_dir,
                                  bool with_hpo,
                                  const std::filesystem::path& log_dir);

/// CSV + markdown per table plus the manifest; returns the written paths.
std::vector<std::filesystem::path> writeArtifacts(
    const ExperimentArtifacts& artifacts, const ExperimentConfig& cfg,
    std::uint64_t snapshot_hash, const std::filesystem::path& out_dir);

std::vector<std::string> effectiveModels(const ExperimentConfig& cfg);

}  // namespace recbench
