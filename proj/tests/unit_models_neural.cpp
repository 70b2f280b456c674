#include <doctest.h>

#include <cmath>

#include "recbench/models/neural.hpp"
#include "test_support.hpp"

using namespace recbench;

namespace {

using DMat = Autoencoder<double>::Mat;

/// Scalar-by-scalar forward oracle (no Eigen products): DAE path.
std::vector<double> scalarForwardDae(const Autoencoder<double>& net,
                                     std::vector<double> x) {
  const auto& w = net.weights();
  const auto& b = net.biases();
  double norm = 0;
  for (double v : x) norm += v * v;
  norm = std::sqrt(norm);
  if (norm > 0)
    for (double& v : x) v /= norm;
  auto layer = [&](const std::vector<double>& in, std::size_t l, bool act) {
    std::vector<double> out(w[l].cols(), 0.0);
    for (Index j = 0; j < w[l].cols(); ++j) {
      double s = b[l](0, j);
      for (Index i = 0; i < w[l].rows(); ++i) s += in[i] * w[l](i, j);
      out[j] = act ? std::tanh(s) : s;
    }
    return out;
  };
  auto h1 = layer(x, 0, true);
  auto h2 = layer(h1, 1, true);
  auto h3 = layer(h2, 2, true);
  return layer(h3, 3, false);
}

double lossAt(Autoencoder<double>& net, const DMat& x, double dropout,
              double wd, double beta, std::uint64_t noise_seed) {
  return net.lossAndGrads(x, dropout, wd, beta, noise_seed).loss;
}

/// Central finite differences over every tensor coordinate.
void gradCheck(Autoencoder<double>& net, const DMat& x, double dropout,
               double wd, double beta) {
  const std::uint64_t noise = 1234;
  auto analytic = net.lossAndGrads(x, dropout, wd, beta, noise);
  const double h = 1e-6;
  auto checkTensor = [&](DMat& tensor, const DMat& grad) {
    for (Index i = 0; i < tensor.rows(); ++i)
      for (Index j = 0; j < tensor.cols(); ++j) {
        const double keep = tensor(i, j);
        tensor(i, j) = keep + h;
        const double up = lossAt(net, x, dropout, wd, beta, noise);
        tensor(i, j) = keep - h;
        const double dn = lossAt(net, x, dropout, wd, beta, noise);
        tensor(i, j) = keep;
        const double fd = (up - dn) / (2 * h);
        const double g = grad(i, j);
        const double denom = std::max({std::abs(fd), std::abs(g), 1e-7});
        CHECK(std::abs(fd - g) / denom < 1e-4);
      }
  };
  for (std::size_t t = 0; t < net.weights().size(); ++t)
    checkTensor(net.weights()[t], analytic.gw[t]);
  for (std::size_t t = 0; t < net.biases().size(); ++t)
    checkTensor(net.biases()[t], analytic.gb[t]);
}

DMat toyBatch() {
  DMat x = DMat::Zero(3, 6);
  x(0, 0) = 1; x(0, 2) = 1; x(0, 5) = 1;
  x(1, 1) = 1; x(1, 2) = 1;
  x(2, 3) = 1; x(2, 4) = 1; x(2, 5) = 1;
  return x;
}

}  // namespace

TEST_CASE("zero history produces the decoder bias path") {
  Autoencoder<double> net(AutoencoderKind::Dae, 6, 4, 2, /*seed=*/5);
  DMat zero = DMat::Zero(1, 6);
  DMat logits = net.forward(zero);
  auto oracle = scalarForwardDae(net, std::vector<double>(6, 0.0));
  for (Index j = 0; j < 6; ++j)
    CHECK(logits(0, j) == doctest::Approx(oracle[j]).epsilon(1e-12));
}

TEST_CASE("forward matches a scalar-by-scalar oracle on a 4-item net") {
  Autoencoder<double> net(AutoencoderKind::Dae, 4, 3, 2, /*seed=*/9);
  std::vector<double> x{1, 0, 1, 1};
  DMat xb = DMat::Zero(1, 4);
  xb(0, 0) = 1; xb(0, 2) = 1; xb(0, 3) = 1;
  DMat logits = net.forward(xb);
  auto oracle = scalarForwardDae(net, x);
  for (Index j = 0; j < 4; ++j)
    CHECK(logits(0, j) == doctest::Approx(oracle[j]).epsilon(1e-12));
}

TEST_CASE("forward is deterministic (inference path has no noise)") {
  Autoencoder<double> net(AutoencoderKind::Vae, 6, 4, 3, 7);
  DMat x = toyBatch();
  CHECK((net.forward(x) - net.forward(x)).norm() == 0.0);
}

TEST_CASE("dae gradients match central finite differences") {
  Autoencoder<double> net(AutoencoderKind::Dae, 6, 5, 3, 21);
  gradCheck(net, toyBatch(), /*dropout=*/0.3, /*wd=*/0.01, /*beta=*/0.0);
}

TEST_CASE("vae gradients match central finite differences") {
  Autoencoder<double> net(AutoencoderKind::Vae, 6, 5, 3, 22);
  gradCheck(net, toyBatch(), /*dropout=*/0.25, /*wd=*/0.005, /*beta=*/0.7);
}

TEST_CASE("vae gradients with beta=0 (sampling retained)") {
  Autoencoder<double> net(AutoencoderKind::Vae, 6, 4, 2, 23);
  gradCheck(net, toyBatch(), /*dropout=*/0.0, /*wd=*/0.0, /*beta=*/0.0);
}

TEST_CASE("vae loss with beta=0 equals the reconstruction term") {
  Autoencoder<double> net(AutoencoderKind::Vae, 6, 4, 2, 11);
  auto lg = net.lossAndGrads(toyBatch(), 0.2, 0.0, 0.0, 99);
  CHECK(lg.loss == doctest::Approx(lg.reconstruction).epsilon(1e-14));
  CHECK(lg.kl >= 0.0);
}

TEST_CASE("KL of a standard-normal posterior is exactly zero") {
  Autoencoder<double> net(AutoencoderKind::Vae, 6, 4, 2, 12);
  // zero the mean/log-variance heads: q = N(0, I) for every input
  net.weights()[1].setZero();
  net.weights()[2].setZero();
  net.biases()[1].setZero();
  net.biases()[2].setZero();
  auto lg = net.lossAndGrads(toyBatch(), 0.0, 0.0, 1.0, 4);
  CHECK(lg.kl == 0.0);
}

TEST_CASE("item permutation equivariance with an explicitly permuted model") {
  const Index n = 6;
  Autoencoder<double> net(AutoencoderKind::Dae, n, 4, 3, 31);
  std::vector<Index> perm{3, 0, 5, 1, 4, 2};  // item i -> position perm[i]

  Autoencoder<double> permuted = net;
  // input weights: row i of W1 moves to row perm[i]
  for (Index i = 0; i < n; ++i)
    permuted.weights()[0].row(perm[i]) = net.weights()[0].row(i);
  // output weights/bias: column j of W4 moves to column perm[j]
  for (Index j = 0; j < n; ++j) {
    permuted.weights()[3].col(perm[j]) = net.weights()[3].col(j);
    permuted.biases()[3](0, perm[j]) = net.biases()[3](0, j);
  }

  DMat x = toyBatch();
  DMat xp = DMat::Zero(x.rows(), n);
  for (Index r = 0; r < x.rows(); ++r)
    for (Index i = 0; i < n; ++i) xp(r, perm[i]) = x(r, i);

  DMat base = net.forward(x);
  DMat moved = permuted.forward(xp);
  for (Index r = 0; r < x.rows(); ++r)
    for (Index i = 0; i < n; ++i)
      CHECK(moved(r, perm[i]) == doctest::Approx(base(r, i)).epsilon(1e-10));
}

TEST_CASE("non-finite loss raises the divergence error") {
  Autoencoder<double> net(AutoencoderKind::Dae, 6, 4, 2, 3);
  net.weights()[3].array() = std::numeric_limits<double>::infinity();
  CHECK_THROWS_WITH_AS(net.lossAndGrads(toyBatch(), 0.0, 0.0, 0.0, 1),
                       "numerical divergence", Error);
}

TEST_CASE("multidae training loss trends down on a 50-user toy") {
  auto x = recbench::testing::clusteredDataset(50, 20, 2, 6, 17).matrix;
  ParamMap overrides{{"hidden", std::int64_t{16}},
                     {"latent", std::int64_t{8}},
                     {"epochs", std::int64_t{30}},
                     {"batch_size", std::int64_t{16}},
                     {"dropout", 0.2}};
  auto m = fitModel("multidae", x, overrides, 41);
  const auto& trace = neuralTrainTrace(*m);
  REQUIRE(trace.epoch_loss.size() == 30);
  // 10-epoch moving average strictly decreasing
  auto ma = [&](std::size_t start) {
    double s = 0;
    for (std::size_t i = start; i < start + 10; ++i) s += trace.epoch_loss[i];
    return s / 10.0;
  };
  for (std::size_t s = 1; s + 10 <= trace.epoch_loss.size(); ++s)
    CHECK(ma(s) < ma(s - 1));
}

TEST_CASE("fitted neural models score deterministically and round trip") {
  auto x = recbench::testing::clusteredDataset(40, 15, 2, 5, 19).matrix;
  ParamMap overrides{{"hidden", std::int64_t{12}},
                     {"latent", std::int64_t{6}},
                     {"epochs", std::int64_t{8}},
                     {"batch_size", std::int64_t{16}}};
  auto probe = recbench::testing::randomBinary(4, 15, 0.25, 3);
  for (const char* name : {"multidae", "multivae"}) {
    auto m = fitModel(name, x, overrides, 43);
    auto s1 = m->score(probe);
    auto s2 = m->score(probe);
    CHECK((s1 - s2).norm() == 0.0);

    auto refit = fitModel(name, x, overrides, 43);
    CHECK((refit->score(probe) - s1).norm() == 0.0);

    std::stringstream buf;
    m->save(buf);
    auto loaded = loadRecommender(buf);
    CHECK((loaded->score(probe) - s1).norm() == 0.0);
  }
}

TEST_CASE("early stopping keeps the best weights and stops on patience") {
  auto data = recbench::testing::clusteredDataset(60, 20, 3, 6, 23);
  // hold out one item per user as the early-stop probe
  std::vector<Index> users;
  for (Index u = 0; u < data.users(); ++u) users.push_back(u);
  auto holdouts = selectHoldouts(data, users, 7);

  EvalSet eval;
  std::vector<std::vector<std::pair<Index, double>>> rows;
  for (Index u = 0; u < data.users(); ++u) {
    std::vector<std::pair<Index, double>> row;
    for (Index c : data.matrix.rowCols(u))
      if (c != holdouts.item_of_user[u]) row.emplace_back(c, 1.0);
    rows.push_back(std::move(row));
    eval.targets.push_back(holdouts.item_of_user[u]);
  }
  eval.histories = SparseMatrix::fromRows(data.users(), data.items(), rows);
  eval.k = 10;

  FitContext ctx;
  ctx.early_stop = &eval;
  ParamMap overrides{{"hidden", std::int64_t{16}},
                     {"latent", std::int64_t{8}},
                     {"epochs", std::int64_t{100}},
                     {"batch_size", std::int64_t{32}},
                     {"patience", std::int64_t{3}}};
  auto m = fitModel("multidae", data.matrix, overrides, 3, ctx);
  const auto& trace = neuralTrainTrace(*m);
  REQUIRE(!trace.eval_metric.empty());
  CHECK(trace.best_epoch >= 0);
  // stopped within patience of the best epoch, or ran out of epochs
  CHECK(trace.eval_metric.size() <=
        static_cast<std::size_t>(trace.best_epoch) + 3 + 1);
  // the kept weights reproduce the best recorded metric
  double best = *std::max_element(trace.eval_metric.begin(),
                                  trace.eval_metric.end());
  CHECK(trace.eval_metric[trace.best_epoch] == doctest::Approx(best));
}
