#include <algorithm>
#include <cmath>
#include <numeric>

#include "drr/baselines.hpp"
#include "drr/error.hpp"

namespace drr::baselines {

namespace {

void check_training_set(std::span<const SparseVector> x, std::span<const Label> y) {
  if (x.size() != y.size()) throw ShapeError("feature rows and labels disagree in count");
  if (x.empty()) throw DataError("empty training set");
  const auto dim = x.front().dim;
  for (const auto& row : x)
    if (row.dim != dim) throw ShapeError("training rows have inconsistent dimensions");
  bool seen[kNumClasses] = {};
  for (Label l : y) seen[index_of(l)] = true;
  if (std::count(std::begin(seen), std::end(seen), true) < 2)
    throw DataError("training labels must contain at least two distinct classes");
}

Probs softmax3(const Probs& z) {
  const double mx = std::max({z[0], z[1], z[2]});
  Probs p;
  double s = 0.0;
  for (std::size_t c = 0; c < kNumClasses; ++c) s += p[c] = std::exp(z[c] - mx);
  for (auto& v : p) v /= s;
  return p;
}

}  // namespace

Probs LinearModel::decision(const SparseVector& x) const {
  if (x.dim != dim()) throw ShapeError("input dim " + std::to_string(x.dim) + " vs model dim " + std::to_string(dim()));
  Probs out = intercept;
  for (const auto& [i, v] : x.entries)
    for (std::size_t c = 0; c < kNumClasses; ++c) out[c] += weights(static_cast<Eigen::Index>(c), i) * v;
  return out;
}

Label LinearModel::predict(const SparseVector& x) const { return label_from_index(nn::argmax(decision(x))); }

Probs LinearModel::predict_proba(const SparseVector& x) const { return softmax3(decision(x)); }

LinearModel svm_train(std::span<const SparseVector> x, std::span<const Label> y, const SvmOptions& opt) {
  check_training_set(x, y);
  if (!(opt.lambda > 0.0)) throw ConfigError("SVM lambda must be positive");
  const auto dim = x.front().dim;
  const auto n = x.size();

  // w_c = scale_c * v_c, with v_c[dim] holding the constant-feature weight.
  std::vector<std::vector<double>> v(kNumClasses, std::vector<double>(dim + 1, 0.0));
  std::array<double, kNumClasses> scale{1.0, 1.0, 1.0};
  const RngStream root(opt.seed);
  std::vector<std::size_t> order(n);
  std::int64_t t = 0;
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto rng = root.derive({static_cast<std::uint64_t>(epoch)});
    rng.shuffle(order);
    for (auto i : order) {
      ++t;
      const double eta = 1.0 / (opt.lambda * static_cast<double>(t));
      const double shrink = 1.0 - eta * opt.lambda;
      for (std::size_t c = 0; c < kNumClasses; ++c) {
        auto& vc = v[c];
        const double target = index_of(y[i]) == static_cast<int>(c) ? 1.0 : -1.0;
        double dot = vc[dim];
        for (const auto& [j, val] : x[i].entries) dot += vc[j] * val;
        const double margin = target * scale[c] * dot;
        if (shrink <= 0.0) {
          std::fill(vc.begin(), vc.end(), 0.0);
          scale[c] = 1.0;
        } else {
          scale[c] *= shrink;
        }
        if (margin < 1.0) {
          const double step = eta * target / scale[c];
          for (const auto& [j, val] : x[i].entries) vc[j] += step * val;
          vc[dim] += step;
        }
        if (scale[c] < 1e-9) {
          for (auto& w : vc) w *= scale[c];
          scale[c] = 1.0;
        }
      }
    }
  }

  LinearModel m;
  m.kind = LinearKind::SvmHinge;
  m.weights = Matrix::Zero(static_cast<Eigen::Index>(kNumClasses), static_cast<Eigen::Index>(dim));
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    for (std::size_t j = 0; j < dim; ++j) m.weights(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(j)) = scale[c] * v[c][j];
    m.intercept[c] = scale[c] * v[c][dim];
  }
  return m;
}

LinearModel logreg_train(std::span<const SparseVector> x, std::span<const Label> y, const LogRegOptions& opt) {
  check_training_set(x, y);
  if (!(opt.l2 >= 0.0)) throw ConfigError("logistic regression l2 must be non-negative");
  const auto dim = static_cast<Eigen::Index>(x.front().dim);
  const auto n = static_cast<double>(x.size());
  const auto k = static_cast<Eigen::Index>(kNumClasses);

  double mean_sq = 0.0;
  for (const auto& row : x) mean_sq += row.squared_norm() + 1.0;
  mean_sq /= n;
  const double step = 1.0 / (0.5 * mean_sq + 2.0 * opt.l2);

  LinearModel m;
  m.kind = LinearKind::Logistic;
  m.weights = Matrix::Zero(k, dim);
  Matrix grad(k, dim);
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    grad = (2.0 * opt.l2) * m.weights;
    Probs grad_b{};
    for (std::size_t i = 0; i < x.size(); ++i) {
      Probs p = m.predict_proba(x[i]);
      p[static_cast<std::size_t>(index_of(y[i]))] -= 1.0;
      for (std::size_t c = 0; c < kNumClasses; ++c) {
        const double g = p[c] / n;
        grad_b[c] += g;
        for (const auto& [j, val] : x[i].entries) grad(static_cast<Eigen::Index>(c), j) += g * val;
      }
    }
    m.weights -= step * grad;
    for (std::size_t c = 0; c < kNumClasses; ++c) m.intercept[c] -= step * grad_b[c];
  }
  return m;
}

}  // namespace drr::baselines
