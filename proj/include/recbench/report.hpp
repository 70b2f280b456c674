#pragma once

#include <filesystem>

#include "recbench/config.hpp"
#include "recbench/metrics.hpp"
#include "recbench/protocols.hpp"

namespace recbench {

/// Scalar metrics of one protocol run: hr@k (or recall@k for the reranking
/// task), mean_ranks, gini@k and entropy@k over the top-list exposures.
/// per_fold carries the per-round values when the protocol has rounds.
std::vector<MetricReport> buildReports(const ProtocolResult& result,
                                       const std::string& dataset);

/// One table = all models' reports for one (protocol, dataset).
struct ReportTable {
  std::string protocol;
  std::string dataset;
  std::vector<MetricReport> rows;
};

/// CSV with a versioned magic first line; fixed formatting so identical
/// configs and seeds rewrite byte-identical files.
void writeCsv(const std::filesystem::path& path, const ReportTable& table);
ReportTable readCsv(const std::filesystem::path& path);

/// Human-readable aligned table, models sorted ascending by utility.
void writeMarkdown(const std::filesystem::path& path, const ReportTable& table);

/// Fractional (mean-of-tied-positions) ranking of models on one metric.
/// Lower rank = better; direction depends on the metric (hr/recall/entropy
/// descending, mean_ranks/gini ascending).
struct RankTable {
  std::string metric;
  std::vector<std::string> models;
  std::vector<std::string> datasets;
  // rank[m][d]; avg_rank[m] is the mean over datasets
  std::vector<std::vector<double>> rank;
  std::vector<double> avg_rank;
};

RankTable aggregateRanks(const std::vector<ReportTable>& tables,
                         const std::string& metric);
void writeRankCsv(const std::filesystem::path& path, const RankTable& table);
void writeRankMarkdown(const std::filesystem::path& path,
                       const RankTable& table);

/// Fractional ranks (1 = best) with ties sharing the mean of their
/// positions. `ascending` = smaller metric value is better.
std::vector<double> fractionalRanks(std::span<const double> values,
                                    bool ascending);

bool metricAscending(const std::string& metric);

/// Run manifest: config hash, dataset snapshot hash, seeds, per-run entries.
struct ManifestEntry {
  std::string model;
  std::string protocol;
  ParamMap params;       // resolved params actually used (round 0 if per-round)
  std::uint64_t fit_seed = 0;
  double objective = 0;  // validation HR@k when HPO ran, else NaN
};

void writeManifest(const std::filesystem::path& path,
                   const ExperimentConfig& cfg, std::uint64_t config_hash,
                   std::uint64_t snapshot_hash,
                   const std::vector<ManifestEntry>& entries);

}  // namespace recbench
