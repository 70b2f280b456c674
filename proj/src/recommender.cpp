#include "recbench/recommender.hpp"

#include <limits>
#include <ostream>

#include "recbench/model_io.hpp"
#include "recbench/models/classical.hpp"
#include "recbench/models/graph.hpp"
#include "recbench/models/linear.hpp"
#include "recbench/models/matrix.hpp"
#include "recbench/models/neural.hpp"

namespace recbench {

Vector Recommender::itemRelatedness(Index i) const {
  SparseMatrix probe = SparseMatrix::fromTriplets(1, itemCount(), {{0, i, 1.0}});
  return score(probe).row(0).transpose();
}

namespace {
constexpr char kModelMagic[8] = {'R', 'B', 'M', 'O', 'D', 'L', '0', '1'};
}

void Recommender::save(std::ostream& os) const {
  os.write(kModelMagic, sizeof(kModelMagic));
  io::writeString(os, name_);
  io::writeParams(os, params_);
  io::writePod<std::uint64_t>(os, seed_);
  savePayload(os);
  require(os.good(), "model write failed");
}

std::unique_ptr<Recommender> loadRecommender(std::istream& is) {
  char magic[8];
  is.read(magic, sizeof(magic));
  require(is.good() && std::equal(magic, magic + 8, kModelMagic),
          "not a model file (bad magic)");
  std::string name = io::readString(is);
  ParamMap params = io::readParams(is);
  auto seed = io::readPod<std::uint64_t>(is);
  if (name == "puresvd" || name == "als")
    return loadMatrixModel(name, std::move(params), seed, is);
  if (name == "multidae" || name == "multivae")
    return loadNeural(name, std::move(params), seed, is);
  return loadClassical(name, std::move(params), seed, is);
}

void maskScores(
    RowMatrix& scores,
    const std::function<std::span<const Index>(Index)>& mask_of_row) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  for (Index r = 0; r < scores.rows(); ++r)
    for (Index c : mask_of_row(r)) scores(r, c) = kNegInf;
}

void maskWithHistories(RowMatrix& scores, const SparseMatrix& histories) {
  maskScores(scores, [&](Index r) { return histories.rowCols(r); });
}

namespace {

std::vector<ModelInfo> buildRegistry() {
  std::vector<ModelInfo> reg;
  auto plain = [](auto fn) {
    return [fn](const SparseMatrix& train, const ParamMap& params,
                std::uint64_t seed, const FitContext&) {
      return fn(train, params, seed);
    };
  };
  reg.push_back({"random",
                 {},
                 [](const SparseMatrix& train, const ParamMap& params,
                    std::uint64_t seed, const FitContext&) {
                   return fitRandom(train.cols(), params, seed);
                 }});
  reg.push_back({"popularity", {}, plain(fitPopularity)});
  reg.push_back({"itemknn",
                 {{"k", std::int64_t{200}},
                  {"shrinkage", 20.0},
                  {"normalize", false}},
                 plain(fitItemKnn)});
  reg.push_back({"userknn",
                 {{"k", std::int64_t{200}},
                  {"shrinkage", 20.0},
                  {"normalize", false}},
                 plain(fitUserKnn)});
  reg.push_back({"puresvd", {{"rank", std::int64_t{50}}}, plain(fitPureSvd)});
  reg.push_back({"als",
                 {{"rank", std::int64_t{64}},
                  {"reg", 1e-2},
                  {"alpha", 10.0},
                  {"iters", std::int64_t{15}}},
                 plain(fitAls)});
  reg.push_back({"ease", {{"l2", 100.0}}, plain(fitEase)});
  reg.push_back({"slim",
                 {{"l1", 1e-3},
                  {"l2", 1.0},
                  {"max_iter", std::int64_t{100}},
                  {"tol", 1e-4},
                  {"nonneg", true}},
                 plain(fitSlim)});
  reg.push_back({"p3alpha",
                 {{"alpha", 1.0}, {"topk", std::int64_t{200}}},
                 plain(fitP3Alpha)});
  reg.push_back({"rp3beta",
                 {{"alpha", 1.0}, {"beta", 0.6}, {"topk", std::int64_t{200}}},
                 plain(fitRp3Beta)});
  reg.push_back({"gfcf",
                 {{"filter_alpha", 0.3}, {"rank", std::int64_t{64}}},
                 plain(fitGfcf)});
  const ParamMap dae_defaults = {{"hidden", std::int64_t{600}},
                                 {"latent", std::int64_t{200}},
                                 {"dropout", 0.5},
                                 {"lr", 1e-3},
                                 {"weight_decay", 0.0},
                                 {"batch_size", std::int64_t{256}},
                                 {"epochs", std::int64_t{200}},
                                 {"patience", std::int64_t{5}}};
  ParamMap vae_defaults = dae_defaults;
  vae_defaults["beta_cap"] = 0.2;
  vae_defaults["anneal_steps"] = std::int64_t{2000};
  reg.push_back({"multidae", dae_defaults, fitMultiDae});
  reg.push_back({"multivae", vae_defaults, fitMultiVae});
  return reg;
}

const std::vector<ModelInfo>& registry() {
  static const std::vector<ModelInfo> reg = buildRegistry();
  return reg;
}

}  // namespace

const std::vector<std::string>& modelNames() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& info : registry()) out.push_back(info.name);
    return out;
  }();
  return names;
}

const ModelInfo& modelInfo(const std::string& name) {
  for (const auto& info : registry())
    if (info.name == name) return info;
  fail("unknown model: " + name);
}

bool isModelName(const std::string& name) {
  for (const auto& info : registry())
    if (info.name == name) return true;
  return false;
}

std::unique_ptr<Recommender> fitModel(const std::string& name,
                                      const SparseMatrix& train,
                                      const ParamMap& overrides,
                                      std::uint64_t seed,
                                      const FitContext& ctx) {
  const ModelInfo& info = modelInfo(name);
  ParamMap params = mergeParams(info.defaults, overrides, name);
  return info.fit(train, params, seed, ctx);
}

}  // namespace recbench
