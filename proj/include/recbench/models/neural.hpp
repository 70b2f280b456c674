#pragma once

#include <cmath>
#include <random>

#include "recbench/recommender.hpp"

namespace recbench {

enum class AutoencoderKind { Dae, Vae };

/// Multinomial-likelihood MLP autoencoder over item vectors. Architecture
/// n -> hidden -> latent -> hidden -> n with tanh hidden activations; the
/// VAE encoder emits a latent mean and log-variance instead of a plain
/// bottleneck. Scalar is float for training speed, double for the
/// finite-difference gradient gate; the arithmetic is identical.
template <typename Scalar>
class Autoencoder {
 public:
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Arr = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Autoencoder(AutoencoderKind kind, Index n_items, Index hidden, Index latent,
              std::uint64_t seed)
      : kind_(kind), n_items_(n_items), hidden_(hidden), latent_(latent) {
    require(n_items >= 1 && hidden >= 1 && latent >= 1, "bad widths");
    std::mt19937_64 rng(mix64(seed, 0xae0u));
    if (kind == AutoencoderKind::Dae) {
      addLayer(n_items, hidden, rng);   // encoder 1
      addLayer(hidden, latent, rng);    // encoder 2
    } else {
      addLayer(n_items, hidden, rng);   // encoder
      addLayer(hidden, latent, rng);    // mean head
      addLayer(hidden, latent, rng);    // log-variance head
    }
    addLayer(latent, hidden, rng);      // decoder 1
    addLayer(hidden, n_items, rng);     // decoder 2
  }

  AutoencoderKind kind() const { return kind_; }
  Index items() const { return n_items_; }
  std::size_t tensorCount() const { return w_.size() + b_.size(); }
  std::vector<Mat>& weights() { return w_; }
  std::vector<Mat>& biases() { return b_; }
  const std::vector<Mat>& weights() const { return w_; }
  const std::vector<Mat>& biases() const { return b_; }

  /// Inference logits (dropout off, VAE mean path).
  Mat forward(const Mat& x) const {
    Mat xn = normalized(x);
    Mat h1 = tanhOf(affine(xn, 0));
    Mat zin;
    if (kind_ == AutoencoderKind::Dae) {
      zin = tanhOf(affine(h1, 1));
    } else {
      zin = affine(h1, 1);  // mean
    }
    Mat h3 = tanhOf(affine(zin, decoder0()));
    return affine(h3, decoder0() + 1);
  }

  struct LossGrads {
    double loss = 0;
    double reconstruction = 0;
    double kl = 0;
    std::vector<Mat> gw;
    std::vector<Mat> gb;
  };

  /// Training loss and full backprop gradients for one batch. Dropout masks
  /// and VAE noise are drawn deterministically from noise_seed, so two calls
  /// with the same arguments see the same perturbations (finite differences
  /// rely on this).
  LossGrads lossAndGrads(const Mat& x, double dropout, double weight_decay,
                         double beta, std::uint64_t noise_seed) const {
    const Index batch = static_cast<Index>(x.rows());
    require(batch > 0, "empty batch");
    const Scalar inv_b = Scalar(1) / static_cast<Scalar>(batch);
    std::mt19937_64 rng(mix64(noise_seed, 0x401ce5u));

    Mat xn = normalized(x);
    if (dropout > 0) applyDropout(xn, dropout, rng);

    Mat h1 = tanhOf(affine(xn, 0));
    Mat mu, lv, eps, z;
    if (kind_ == AutoencoderKind::Dae) {
      z = tanhOf(affine(h1, 1));
    } else {
      mu = affine(h1, 1);
      lv = affine(h1, 2);
      eps = gaussLike(mu, rng);
      z = mu + (eps.array() * (lv.array() * Scalar(0.5)).exp()).matrix();
    }
    Mat h3 = tanhOf(affine(z, decoder0()));
    Mat logits = affine(h3, decoder0() + 1);

    // Row-wise log softmax.
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> row_max = logits.rowwise().maxCoeff();
    Mat shifted = logits.colwise() - row_max;
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> lse =
        shifted.array().exp().rowwise().sum().log().matrix();
    Mat softmax = (shifted.colwise() - lse).array().exp().matrix();

    double rec = 0;
    for (Index r = 0; r < batch; ++r)
      for (Index c = 0; c < n_items_; ++c)
        if (x(r, c) != Scalar(0))
          rec -= static_cast<double>(x(r, c)) *
                 static_cast<double>(shifted(r, c) - lse[r]);
    rec *= static_cast<double>(inv_b);

    double kl = 0;
    if (kind_ == AutoencoderKind::Vae) {
      kl = 0.5 *
           static_cast<double>((lv.array().exp() + mu.array().square() -
                                Scalar(1) - lv.array())
                                   .sum()) *
           static_cast<double>(inv_b);
    }

    LossGrads out;
    out.gw.resize(w_.size());
    out.gb.resize(b_.size());
    out.reconstruction = rec;
    out.kl = kl;
    out.loss = rec + beta * kl;
    for (const Mat& w : w_)
      out.loss += 0.5 * weight_decay * static_cast<double>(w.squaredNorm());

    // d loss / d logits = (softmax * rowsum(targets) - targets) / B.
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> target_mass = x.rowwise().sum();
    Mat g_logits =
        ((softmax.array().colwise() * target_mass.array()) - x.array())
            .matrix() *
        inv_b;

    const std::size_t dec1 = decoder0() + 1;
    out.gw[dec1] = h3.transpose() * g_logits;
    out.gb[dec1] = g_logits.colwise().sum();
    Mat g_h3 = (g_logits * w_[dec1].transpose()).array() *
               (Scalar(1) - h3.array().square());
    out.gw[decoder0()] = z.transpose() * g_h3;
    out.gb[decoder0()] = g_h3.colwise().sum();
    Mat g_z = g_h3 * w_[decoder0()].transpose();

    Mat g_h1;
    if (kind_ == AutoencoderKind::Dae) {
      Mat g_z_pre = g_z.array() * (Scalar(1) - z.array().square());
      out.gw[1] = h1.transpose() * g_z_pre;
      out.gb[1] = g_z_pre.colwise().sum();
      g_h1 = g_z_pre * w_[1].transpose();
    } else {
      const Scalar beta_b = static_cast<Scalar>(beta) * inv_b;
      Mat g_mu = g_z + (beta_b * mu.array()).matrix();
      Mat g_lv =
          (g_z.array() * eps.array() * (lv.array() * Scalar(0.5)).exp() *
               Scalar(0.5) +
           beta_b * Scalar(0.5) * (lv.array().exp() - Scalar(1)))
              .matrix();
      out.gw[1] = h1.transpose() * g_mu;
      out.gb[1] = g_mu.colwise().sum();
      out.gw[2] = h1.transpose() * g_lv;
      out.gb[2] = g_lv.colwise().sum();
      g_h1 = g_mu * w_[1].transpose() + g_lv * w_[2].transpose();
    }
    g_h1 = (g_h1.array() * (Scalar(1) - h1.array().square())).matrix();
    out.gw[0] = xn.transpose() * g_h1;
    out.gb[0] = g_h1.colwise().sum();

    for (std::size_t t = 0; t < w_.size(); ++t)
      out.gw[t] += static_cast<Scalar>(weight_decay) * w_[t];

    require(std::isfinite(out.loss), "numerical divergence");
    return out;
  }

 private:
  std::size_t decoder0() const {
    return kind_ == AutoencoderKind::Dae ? 2 : 3;
  }

  void addLayer(Index in, Index out, std::mt19937_64& rng) {
    // Uniform fan-in scaling.
    const Scalar limit = static_cast<Scalar>(1.0 / std::sqrt(double(in)));
    std::uniform_real_distribution<double> u(-limit, limit);
    Mat w(in, out);
    for (Index j = 0; j < out; ++j)
      for (Index i = 0; i < in; ++i) w(i, j) = static_cast<Scalar>(u(rng));
    w_.push_back(std::move(w));
    b_.push_back(Mat::Zero(1, out));
  }

  Mat affine(const Mat& x, std::size_t layer) const {
    return (x * w_[layer]).rowwise() + b_[layer].row(0);
  }

  static Mat tanhOf(const Mat& x) { return x.array().tanh().matrix(); }

  Mat normalized(const Mat& x) const {
    Mat out = x;
    for (Index r = 0; r < out.rows(); ++r) {
      const Scalar n = out.row(r).norm();
      if (n > Scalar(0)) out.row(r) /= n;
    }
    return out;
  }

  void applyDropout(Mat& x, double rate, std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Scalar scale = static_cast<Scalar>(1.0 / (1.0 - rate));
    for (Index r = 0; r < x.rows(); ++r)
      for (Index c = 0; c < x.cols(); ++c)
        x(r, c) = u(rng) < rate ? Scalar(0) : x(r, c) * scale;
  }

  Mat gaussLike(const Mat& ref, std::mt19937_64& rng) const {
    std::normal_distribution<double> g(0.0, 1.0);
    Mat out(ref.rows(), ref.cols());
    for (Index r = 0; r < out.rows(); ++r)
      for (Index c = 0; c < out.cols(); ++c)
        out(r, c) = static_cast<Scalar>(g(rng));
    return out;
  }

  AutoencoderKind kind_;
  Index n_items_;
  Index hidden_;
  Index latent_;
  std::vector<Mat> w_;
  std::vector<Mat> b_;
};

struct TrainTrace {
  std::vector<double> epoch_loss;
  std::vector<double> eval_metric;  // early-stop HR@k per epoch (if eval set)
  int best_epoch = -1;
};

std::unique_ptr<Recommender> fitMultiDae(const SparseMatrix& train,
                                         const ParamMap& params,
                                         std::uint64_t seed,
                                         const FitContext& ctx);
std::unique_ptr<Recommender> fitMultiVae(const SparseMatrix& train,
                                         const ParamMap& params,
                                         std::uint64_t seed,
                                         const FitContext& ctx);

/// Training trace of a fitted neural model (loss curve, early-stop path).
const TrainTrace& neuralTrainTrace(const Recommender& model);

std::unique_ptr<Recommender> loadNeural(const std::string& name,
                                        ParamMap params, std::uint64_t seed,
                                        std::istream& is);

}  // namespace recbench
