#include "recbench/models/matrix.hpp"

#include <Eigen/Cholesky>
#include <random>

#include "recbench/kernels.hpp"
#include "recbench/model_io.hpp"

namespace recbench {

PureSvdModel::PureSvdModel(ParamMap params, std::uint64_t seed, DenseMatrix v)
    : Recommender("puresvd", std::move(params), seed), v_(std::move(v)) {}

RowMatrix PureSvdModel::score(const SparseMatrix& histories) const {
  require(histories.cols() == v_.rows(), "history/item-catalog mismatch");
  DenseMatrix coords = histories.multiply(v_);  // n x rank
  return RowMatrix(coords * v_.transpose());
}

Vector PureSvdModel::foldIn(std::span<const Index> items,
                            std::span<const double> vals) const {
  Vector coords = Vector::Zero(v_.cols());
  for (std::size_t t = 0; t < items.size(); ++t)
    coords += vals[t] * v_.row(items[t]).transpose();
  return coords;
}

void PureSvdModel::savePayload(std::ostream& os) const {
  io::writeDenseColMajor(os, v_);
}

std::unique_ptr<Recommender> fitPureSvd(const SparseMatrix& train,
                                        const ParamMap& params,
                                        std::uint64_t seed) {
  const Index rank = static_cast<Index>(getInt(params, "rank"));
  DenseFactorPair svd = truncatedSvd(train, rank, seed);
  return std::make_unique<PureSvdModel>(params, seed,
                                        std::move(svd.col_factors));
}

// ---------------------------------------------------------------------------

namespace {

/// One ridge solve of the confidence-weighted normal equations:
///   (F^T F + alpha * F_h^T F_h + reg I) w = (1 + alpha) * sum_{i in h} f_i
/// where F is the fixed side's factor matrix and F_h its rows owned by the
/// history. gram_reg caches F^T F + reg I.
Vector confidenceSolve(const DenseMatrix& gram_reg, const DenseMatrix& factors,
                       double alpha, std::span<const Index> items,
                       std::span<const double> vals) {
  const Index rank = static_cast<Index>(factors.cols());
  DenseMatrix a = gram_reg;
  Vector b = Vector::Zero(rank);
  for (std::size_t t = 0; t < items.size(); ++t) {
    const double x = vals[t];
    const auto f = factors.row(items[t]);
    // c - 1 = alpha * x ; target p = 1 for stored positives.
    a.selfadjointView<Eigen::Lower>().rankUpdate(f.transpose(), alpha * x);
    b += (1.0 + alpha * x) * f.transpose();
  }
  // LLT reads only the lower triangle, which the rank updates maintained.
  return Eigen::LLT<DenseMatrix>(a).solve(b);
}

/// Full weighted objective
///   sum_u [ u^T (Y^T Y) u + sum_{i in u} ((1+alpha)(1 - u.y_i)^2 - (u.y_i)^2) ]
///   + reg (|U|^2 + |V|^2)
double alsObjective(const SparseMatrix& x, const DenseMatrix& users,
                    const DenseMatrix& items, double reg, double alpha) {
  DenseMatrix yty = items.transpose() * items;
  double obj = 0;
  for (Index u = 0; u < x.rows(); ++u) {
    const auto uu = users.row(u);
    obj += uu * yty * uu.transpose();
    auto cs = x.rowCols(u);
    auto vs = x.rowVals(u);
    for (std::size_t t = 0; t < cs.size(); ++t) {
      double s = uu.dot(items.row(cs[t]));
      double c = 1.0 + alpha * vs[t];
      obj += c * (1.0 - s) * (1.0 - s) - s * s;
    }
  }
  obj += reg * (users.squaredNorm() + items.squaredNorm());
  return obj;
}

void alternate(const SparseMatrix& x, DenseMatrix& solve_side,
               const DenseMatrix& fixed_side, double reg, double alpha) {
  const Index rank = static_cast<Index>(fixed_side.cols());
  DenseMatrix gram_reg = fixed_side.transpose() * fixed_side +
                         reg * DenseMatrix::Identity(rank, rank);
  parallelFor(0, x.rows(), [&](Index r) {
    solve_side.row(r) =
        confidenceSolve(gram_reg, fixed_side, alpha, x.rowCols(r), x.rowVals(r))
            .transpose();
  });
}

}  // namespace

AlsModel::AlsModel(ParamMap params, std::uint64_t seed,
                   DenseMatrix item_factors, DenseMatrix user_factors,
                   std::vector<double> objective_trace)
    : Recommender("als", std::move(params), seed),
      item_factors_(std::move(item_factors)),
      user_factors_(std::move(user_factors)),
      objective_trace_(std::move(objective_trace)),
      reg_(getReal(params_, "reg")),
      alpha_(getReal(params_, "alpha")) {
  const Index rank = static_cast<Index>(item_factors_.cols());
  gram_reg_ = item_factors_.transpose() * item_factors_ +
              reg_ * DenseMatrix::Identity(rank, rank);
}

Vector AlsModel::foldIn(std::span<const Index> items,
                        std::span<const double> vals) const {
  return confidenceSolve(gram_reg_, item_factors_, alpha_, items, vals);
}

RowMatrix AlsModel::score(const SparseMatrix& histories) const {
  require(histories.cols() == item_factors_.rows(),
          "history/item-catalog mismatch");
  DenseMatrix coords(histories.rows(), item_factors_.cols());
  parallelFor(0, histories.rows(), [&](Index r) {
    coords.row(r) =
        foldIn(histories.rowCols(r), histories.rowVals(r)).transpose();
  });
  return RowMatrix(coords * item_factors_.transpose());
}

void AlsModel::savePayload(std::ostream& os) const {
  io::writeDenseColMajor(os, item_factors_);
  io::writeDenseColMajor(os, user_factors_);
  io::writePod<std::uint64_t>(os, objective_trace_.size());
  for (double v : objective_trace_) io::writePod<double>(os, v);
}

std::unique_ptr<Recommender> fitAls(const SparseMatrix& train,
                                    const ParamMap& params,
                                    std::uint64_t seed) {
  const Index rank = static_cast<Index>(getInt(params, "rank"));
  const double reg = getReal(params, "reg");
  const double alpha = getReal(params, "alpha");
  const auto iters = getInt(params, "iters");
  require(rank >= 1, "rank must be >= 1");
  require(reg > 0, "reg must be > 0");
  require(alpha >= 0, "alpha must be >= 0");

  std::mt19937_64 rng(mix64(seed, 0xa15u));
  std::uniform_real_distribution<double> init(-0.01, 0.01);
  DenseMatrix users(train.rows(), rank), items(train.cols(), rank);
  for (Index j = 0; j < rank; ++j) {
    for (Index i = 0; i < train.rows(); ++i) users(i, j) = init(rng);
    for (Index i = 0; i < train.cols(); ++i) items(i, j) = init(rng);
  }

  const SparseMatrix train_t = train.transposed();
  std::vector<double> trace;
  trace.reserve(iters + 1);
  for (std::int64_t it = 0; it < iters; ++it) {
    alternate(train, users, items, reg, alpha);
    alternate(train_t, items, users, reg, alpha);
    trace.push_back(alsObjective(train, users, items, reg, alpha));
  }
  // Trailing user pass so stored user factors are exact ridge solutions
  // against the final item factors (fold-in of a training row reproduces
  // them bit for bit).
  alternate(train, users, items, reg, alpha);
  trace.push_back(alsObjective(train, users, items, reg, alpha));

  return std::make_unique<AlsModel>(params, seed, std::move(items),
                                    std::move(users), std::move(trace));
}

std::unique_ptr<Recommender> loadMatrixModel(const std::string& name,
                                             ParamMap params,
                                             std::uint64_t seed,
                                             std::istream& is) {
  if (name == "puresvd")
    return std::make_unique<PureSvdModel>(std::move(params), seed,
                                          io::readDenseColMajor(is));
  if (name == "als") {
    DenseMatrix items = io::readDenseColMajor(is);
    DenseMatrix users = io::readDenseColMajor(is);
    auto n = io::readPod<std::uint64_t>(is);
    std::vector<double> trace(n);
    for (auto& v : trace) v = io::readPod<double>(is);
    return std::make_unique<AlsModel>(std::move(params), seed,
                                      std::move(items), std::move(users),
                                      std::move(trace));
  }
  fail("unknown factor model: " + name);
}

}  // namespace recbench
