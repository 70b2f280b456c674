#include "recbench/models/neural.hpp"

#include <algorithm>
#include <numeric>

#include "recbench/metrics.hpp"
#include "recbench/model_io.hpp"

namespace recbench {

namespace {

using FloatMat = Autoencoder<float>::Mat;

/// Adam with bias correction, one moment pair per tensor.
class AdamState {
 public:
  AdamState(double lr, double beta1, double beta2, double eps)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(std::vector<FloatMat>& weights, std::vector<FloatMat>& biases,
            const std::vector<FloatMat>& gw, const std::vector<FloatMat>& gb) {
    if (mw_.empty()) {
      init(mw_, vw_, weights);
      init(mb_, vb_, biases);
    }
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, t_);
    const double c2 = 1.0 - std::pow(beta2_, t_);
    for (std::size_t i = 0; i < weights.size(); ++i)
      update(weights[i], gw[i], mw_[i], vw_[i], c1, c2);
    for (std::size_t i = 0; i < biases.size(); ++i)
      update(biases[i], gb[i], mb_[i], vb_[i], c1, c2);
  }

 private:
  static void init(std::vector<FloatMat>& m, std::vector<FloatMat>& v,
                   const std::vector<FloatMat>& like) {
    for (const auto& t : like) {
      m.push_back(FloatMat::Zero(t.rows(), t.cols()));
      v.push_back(FloatMat::Zero(t.rows(), t.cols()));
    }
  }

  void update(FloatMat& p, const FloatMat& g, FloatMat& m, FloatMat& v,
              double c1, double c2) const {
    m = static_cast<float>(beta1_) * m + static_cast<float>(1.0 - beta1_) * g;
    v = (static_cast<float>(beta2_) * v.array() +
         static_cast<float>(1.0 - beta2_) * g.array().square())
            .matrix();
    p.array() -= static_cast<float>(lr_) *
                 (m.array() / static_cast<float>(c1)) /
                 ((v.array() / static_cast<float>(c2)).sqrt() +
                  static_cast<float>(eps_));
  }

  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<FloatMat> mw_, vw_, mb_, vb_;
};

FloatMat denseBatch(const SparseMatrix& m, std::span<const Index> rows) {
  FloatMat x = FloatMat::Zero(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    auto cs = m.rowCols(rows[r]);
    auto vs = m.rowVals(rows[r]);
    for (std::size_t t = 0; t < cs.size(); ++t)
      x(static_cast<Index>(r), cs[t]) = static_cast<float>(vs[t]);
  }
  return x;
}

class NeuralModel : public Recommender {
 public:
  NeuralModel(std::string name, ParamMap params, std::uint64_t seed,
              Autoencoder<float> net, TrainTrace trace)
      : Recommender(std::move(name), std::move(params), seed),
        net_(std::move(net)),
        trace_(std::move(trace)) {}

  RowMatrix score(const SparseMatrix& histories) const override {
    require(histories.cols() == net_.items(), "history/item-catalog mismatch");
    RowMatrix out(histories.rows(), net_.items());
    constexpr Index kChunk = 512;
    std::vector<Index> rows;
    for (Index start = 0; start < histories.rows(); start += kChunk) {
      const Index stop = std::min<Index>(start + kChunk, histories.rows());
      rows.clear();
      for (Index r = start; r < stop; ++r) rows.push_back(r);
      FloatMat logits = net_.forward(denseBatch(histories, rows));
      out.block(start, 0, stop - start, net_.items()) =
          logits.cast<double>();
    }
    return out;
  }

  Index itemCount() const override { return net_.items(); }
  const TrainTrace& trace() const { return trace_; }
  const Autoencoder<float>& net() const { return net_; }

 protected:
  void savePayload(std::ostream& os) const override {
    io::writePod<std::uint8_t>(
        os, net_.kind() == AutoencoderKind::Vae ? 1 : 0);
    io::writePod<Index>(os, net_.items());
    io::writePod<std::uint64_t>(os, net_.weights().size());
    for (const auto& w : net_.weights()) writeFloatMat(os, w);
    for (const auto& b : net_.biases()) writeFloatMat(os, b);
  }

 private:
  static void writeFloatMat(std::ostream& os, const FloatMat& m) {
    io::writePod<std::int64_t>(os, m.rows());
    io::writePod<std::int64_t>(os, m.cols());
    os.write(reinterpret_cast<const char*>(m.data()),
             static_cast<std::streamsize>(m.size() * sizeof(float)));
  }

  Autoencoder<float> net_;
  TrainTrace trace_;
};

double evalHitRate(const Autoencoder<float>& net, const EvalSet& eval) {
  Index hits = 0;
  constexpr Index kChunk = 512;
  std::vector<Index> rows;
  for (Index start = 0; start < eval.histories.rows(); start += kChunk) {
    const Index stop = std::min<Index>(start + kChunk, eval.histories.rows());
    rows.clear();
    for (Index r = start; r < stop; ++r) rows.push_back(r);
    FloatMat logits = net.forward(denseBatch(eval.histories, rows));
    for (Index r = start; r < stop; ++r) {
      auto mask = eval.histories.rowCols(r);
      const Index target = eval.targets[r];
      const float ts = logits(r - start, target);
      // Rank of the target among unmasked candidates (score desc, index asc).
      Index rank = 1;
      std::size_t mi = 0;
      for (Index i = 0; i < logits.cols() && rank <= eval.k; ++i) {
        while (mi < mask.size() && mask[mi] < i) ++mi;
        if (mi < mask.size() && mask[mi] == i) continue;
        if (i == target) continue;
        const float s = logits(r - start, i);
        if (s > ts || (s == ts && i < target)) ++rank;
      }
      if (rank <= eval.k) ++hits;
    }
  }
  return static_cast<double>(hits) /
         static_cast<double>(eval.histories.rows());
}

std::unique_ptr<Recommender> fitNeural(AutoencoderKind kind,
                                       const std::string& name,
                                       const SparseMatrix& train,
                                       const ParamMap& params,
                                       std::uint64_t seed,
                                       const FitContext& ctx) {
  const Index n_items = train.cols();
  // Desk-scale shrink: hidden capped by the catalog size.
  const Index hidden = static_cast<Index>(
      std::min<std::int64_t>(getInt(params, "hidden"), n_items));
  const Index latent = static_cast<Index>(
      std::min<std::int64_t>(getInt(params, "latent"), hidden));
  const double dropout = getReal(params, "dropout");
  const double lr = getReal(params, "lr");
  const double weight_decay = getReal(params, "weight_decay");
  const auto batch_size = std::max<std::int64_t>(1, getInt(params, "batch_size"));
  const auto epochs = getInt(params, "epochs");
  const auto patience = getInt(params, "patience");
  const bool vae = kind == AutoencoderKind::Vae;
  const double beta_cap = vae ? getReal(params, "beta_cap") : 0.0;
  const auto anneal_steps = vae ? getInt(params, "anneal_steps") : 1;
  require(dropout >= 0 && dropout < 1, "dropout must be in [0,1)");
  require(!vae || (beta_cap >= 0 && beta_cap <= 1),
          "beta_cap must be in [0,1]");

  Autoencoder<float> net(kind, n_items, hidden, latent, seed);
  AdamState adam(lr, 0.9, 0.999, 1e-8);
  TrainTrace trace;

  std::vector<Index> order(train.rows());
  std::iota(order.begin(), order.end(), 0);

  std::vector<FloatMat> best_w, best_b;
  double best_metric = -1;
  int since_best = 0;
  long step = 0;

  for (std::int64_t epoch = 0; epoch < epochs; ++epoch) {
    std::mt19937_64 rng(mix64(seed, static_cast<std::uint64_t>(epoch), 0xe90cu));
    for (Index i = train.rows() - 1; i > 0; --i) {
      std::uniform_int_distribution<Index> pick(0, i);
      std::swap(order[i], order[pick(rng)]);
    }
    double epoch_loss = 0;
    Index n_batches = 0;
    for (Index start = 0; start < train.rows();
         start += static_cast<Index>(batch_size)) {
      const Index stop = std::min<Index>(
          start + static_cast<Index>(batch_size), train.rows());
      FloatMat x = denseBatch(
          train, std::span<const Index>(order.data() + start, stop - start));
      ++step;
      const double beta =
          vae ? beta_cap * std::min(1.0, static_cast<double>(step) /
                                             static_cast<double>(anneal_steps))
              : 0.0;
      auto lg = net.lossAndGrads(
          x, dropout, weight_decay, beta,
          mix64(seed, static_cast<std::uint64_t>(epoch),
                static_cast<std::uint64_t>(start)));
      adam.step(net.weights(), net.biases(), lg.gw, lg.gb);
      epoch_loss += lg.loss;
      ++n_batches;
    }
    trace.epoch_loss.push_back(epoch_loss / std::max<Index>(1, n_batches));

    if (ctx.early_stop != nullptr) {
      const double metric = evalHitRate(net, *ctx.early_stop);
      trace.eval_metric.push_back(metric);
      if (metric > best_metric) {
        best_metric = metric;
        best_w = net.weights();
        best_b = net.biases();
        trace.best_epoch = static_cast<int>(epoch);
        since_best = 0;
      } else if (++since_best >= patience) {
        break;
      }
    }
  }
  if (!best_w.empty()) {
    net.weights() = std::move(best_w);
    net.biases() = std::move(best_b);
  }
  return std::make_unique<NeuralModel>(name, params, seed, std::move(net),
                                       std::move(trace));
}

}  // namespace

std::unique_ptr<Recommender> fitMultiDae(const SparseMatrix& train,
                                         const ParamMap& params,
                                         std::uint64_t seed,
                                         const FitContext& ctx) {
  return fitNeural(AutoencoderKind::Dae, "multidae", train, params, seed, ctx);
}

std::unique_ptr<Recommender> fitMultiVae(const SparseMatrix& train,
                                         const ParamMap& params,
                                         std::uint64_t seed,
                                         const FitContext& ctx) {
  return fitNeural(AutoencoderKind::Vae, "multivae", train, params, seed, ctx);
}

const TrainTrace& neuralTrainTrace(const Recommender& model) {
  const auto* m = dynamic_cast<const NeuralModel*>(&model);
  require(m != nullptr, "not a neural model");
  return m->trace();
}

std::unique_ptr<Recommender> loadNeural(const std::string& name,
                                        ParamMap params, std::uint64_t seed,
                                        std::istream& is) {
  require(name == "multidae" || name == "multivae",
          "unknown neural model: " + name);
  const bool vae = io::readPod<std::uint8_t>(is) != 0;
  const Index n_items = io::readPod<Index>(is);
  const auto n_weights = io::readPod<std::uint64_t>(is);
  auto readFloatMat = [&is]() {
    auto rows = io::readPod<std::int64_t>(is);
    auto cols = io::readPod<std::int64_t>(is);
    FloatMat m(rows, cols);
    is.read(reinterpret_cast<char*>(m.data()),
            static_cast<std::streamsize>(m.size() * sizeof(float)));
    require(is.good(), "truncated model file");
    return m;
  };
  std::vector<FloatMat> w, b;
  for (std::uint64_t i = 0; i < n_weights; ++i) w.push_back(readFloatMat());
  for (std::uint64_t i = 0; i < n_weights; ++i) b.push_back(readFloatMat());
  const Index hidden = static_cast<Index>(w[0].cols());
  const Index latent = static_cast<Index>(w[1].cols());
  Autoencoder<float> net(vae ? AutoencoderKind::Vae : AutoencoderKind::Dae,
                         n_items, hidden, latent, seed);
  net.weights() = std::move(w);
  net.biases() = std::move(b);
  return std::make_unique<NeuralModel>(name, std::move(params), seed,
                                       std::move(net), TrainTrace{});
}

}  // namespace recbench
