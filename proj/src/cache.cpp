#include "recbench/cache.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>

namespace recbench {

namespace fs = std::filesystem;

fs::path cacheDir(const fs::path& base) {
  if (const char* env = std::getenv("RECBENCH_CACHE"); env && *env)
    return fs::path(env);
  return base / "cache";
}

std::string modelCacheKey(std::uint64_t data_hash, const std::string& model,
                          const ParamMap& params, std::uint64_t seed) {
  std::uint64_t h = data_hash;
  h = fnv1a(model, h);
  h = fnv1a(canonical(params), h);
  h = fnv1a(&seed, sizeof(seed), h);
  return model + "-" + hexHash(h) + ".model";
}

FitProvider cachingFitter(const fs::path& cache_dir) {
  fs::create_directories(cache_dir);
  return [cache_dir](const std::string& model, const SparseMatrix& train,
                     const ParamMap& params, std::uint64_t seed,
                     const FitContext& ctx) -> std::unique_ptr<Recommender> {
    const ModelInfo& info = modelInfo(model);
    const ParamMap merged = mergeParams(info.defaults, params, model);
    const fs::path path =
        cache_dir / modelCacheKey(train.contentHash(), model, merged, seed);
    if (fs::exists(path)) {
      std::ifstream is(path, std::ios::binary);
      return loadRecommender(is);
    }
    auto fitted = fitModel(model, train, params, seed, ctx);
    const fs::path tmp = path.string() + ".tmp";
    {
      std::ofstream os(tmp, std::ios::binary);
      fitted->save(os);
    }
    fs::rename(tmp, path);
    return fitted;
  };
}

fs::path snapshotPath(const fs::path& cache_dir, const std::string& dataset,
                      Index h_core, double threshold, std::uint64_t seed) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "h%d-t%g-s%llu", h_core, threshold,
                static_cast<unsigned long long>(seed));
  return cache_dir / (dataset + "-" + buf + ".snapshot");
}

}  // namespace recbench
