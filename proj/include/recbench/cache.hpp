#pragma once

#include <filesystem>

#include "recbench/protocols.hpp"

namespace recbench {

/// Cache root: RECBENCH_CACHE env var, else <base>/cache.
std::filesystem::path cacheDir(const std::filesystem::path& base);

/// Fitted models keyed by (training-data hash, model, canonical params,
/// seed); only an exact match is reused.
std::string modelCacheKey(std::uint64_t data_hash, const std::string& model,
                          const ParamMap& params, std::uint64_t seed);

/// Fit hook that satisfies fits from the cache directory and stores misses.
FitProvider cachingFitter(const std::filesystem::path& cache_dir);

/// Snapshot path for a prepared dataset keyed by (name, h, threshold, seed).
std::filesystem::path snapshotPath(const std::filesystem::path& cache_dir,
                                   const std::string& dataset, Index h_core,
                                   double threshold, std::uint64_t seed);

}  // namespace recbench
