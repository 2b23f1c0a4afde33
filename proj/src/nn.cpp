#include "drr/nn.hpp"

#include <cmath>
#include <numeric>

#include "drr/error.hpp"

namespace drr::nn {

std::size_t ParamSet::add(std::string name, ParamRole role, Eigen::Index rows, Eigen::Index cols) {
  ParamArray p;
  p.name = std::move(name);
  p.role = role;
  p.value = Matrix::Zero(rows, cols);
  p.grad = Matrix::Zero(rows, cols);
  arrays_.push_back(std::move(p));
  return arrays_.size() - 1;
}

ParamArray& ParamSet::at(const std::string& name) {
  for (auto& p : arrays_)
    if (p.name == name) return p;
  throw DataError("no parameter named '" + name + "'");
}

const ParamArray& ParamSet::at(const std::string& name) const {
  for (const auto& p : arrays_)
    if (p.name == name) return p;
  throw DataError("no parameter named '" + name + "'");
}

std::size_t ParamSet::scalar_count() const noexcept {
  std::size_t n = 0;
  for (const auto& p : arrays_) n += p.size();
  return n;
}

void ParamSet::zero_grad() {
  for (auto& p : arrays_) p.grad.setZero();
}

void ParamSet::copy_values_from(const ParamSet& other) {
  if (other.size() != size()) throw ShapeError("parameter sets differ in array count");
  for (std::size_t i = 0; i < size(); ++i) {
    if (arrays_[i].value.rows() != other[i].value.rows() || arrays_[i].value.cols() != other[i].value.cols())
      throw ShapeError("shape mismatch copying parameter '" + arrays_[i].name + "'");
    arrays_[i].value = other[i].value;
  }
}

Matrix dense_forward(const Matrix& x, const ParamArray& w, const ParamArray& b) {
  if (x.cols() != w.value.rows() || b.value.cols() != w.value.cols()) {
    throw ShapeError("dense '" + w.name + "': input width " + std::to_string(x.cols()) +
                     " vs weight " + std::to_string(w.value.rows()) + "x" + std::to_string(w.value.cols()));
  }
  Matrix y = x * w.value;
  y.rowwise() += b.value.row(0);
  return y;
}

Matrix dense_backward(const Matrix& x, const Matrix& dy, ParamArray& w, ParamArray& b) {
  if (dy.cols() != w.value.cols() || x.rows() != dy.rows())
    throw ShapeError("dense '" + w.name + "': upstream gradient shape mismatch");
  w.grad.noalias() += x.transpose() * dy;
  b.grad.row(0) += dy.colwise().sum();
  return dy * w.value.transpose();
}

Matrix relu_forward(const Matrix& x) { return x.cwiseMax(0.0); }

Matrix relu_backward(const Matrix& x, const Matrix& dy) {
  return (x.array() > 0.0).select(dy, 0.0);
}

Matrix layer_norm_forward(const Matrix& x, const ParamArray& gain, const ParamArray& bias,
                          LayerNormCache* cache, double eps) {
  const auto d = static_cast<double>(x.cols());
  const Eigen::VectorXd mean = x.rowwise().sum() / d;
  Matrix centered = x.colwise() - mean;
  const Eigen::VectorXd var = centered.array().square().rowwise().sum() / d;
  const Eigen::VectorXd inv_std = (var.array() + eps).rsqrt();
  Matrix xhat = centered.array().colwise() * inv_std.array();
  Matrix y = xhat.array().rowwise() * gain.value.row(0).array();
  y.rowwise() += bias.value.row(0);
  if (cache) {
    cache->xhat = std::move(xhat);
    cache->inv_std = inv_std;
  }
  return y;
}

Matrix layer_norm_backward(const Matrix& dy, const LayerNormCache& cache, ParamArray& gain,
                           ParamArray& bias) {
  const auto d = static_cast<double>(dy.cols());
  gain.grad.row(0) += (dy.array() * cache.xhat.array()).colwise().sum().matrix();
  bias.grad.row(0) += dy.colwise().sum();
  const Matrix dxhat = dy.array().rowwise() * gain.value.row(0).array();
  const Eigen::VectorXd mean_dxhat = dxhat.rowwise().sum() / d;
  const Eigen::VectorXd mean_dxhat_xhat = (dxhat.array() * cache.xhat.array()).rowwise().sum() / d;
  Matrix dx = dxhat;
  dx.colwise() -= mean_dxhat;
  dx.array() -= cache.xhat.array().colwise() * mean_dxhat_xhat.array();
  dx.array().colwise() *= cache.inv_std.array();
  return dx;
}

Matrix dropout_forward(const Matrix& x, double p, RngStream& rng, bool training, DropoutMask& mask) {
  if (!(p >= 0.0 && p < 1.0)) throw ConfigError("dropout rate must be in [0, 1), got " + std::to_string(p));
  mask.scale.resize(0, 0);
  if (!training || p == 0.0) return x;
  const double keep_scale = 1.0 / (1.0 - p);
  mask.scale.resize(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) mask.scale(i, j) = rng.uniform() < p ? 0.0 : keep_scale;
  return x.cwiseProduct(mask.scale);
}

Matrix dropout_backward(const Matrix& dy, const DropoutMask& mask) {
  return mask.identity() ? dy : Matrix(dy.cwiseProduct(mask.scale));
}

Matrix softmax(const Matrix& logits) {
  Matrix z = logits.colwise() - logits.rowwise().maxCoeff();
  z = z.array().exp();
  const Eigen::VectorXd sums = z.rowwise().sum();
  z.array().colwise() /= sums.array();
  return z;
}

XentResult softmax_xent(const Matrix& logits, std::span<const Label> labels) {
  if (static_cast<std::size_t>(logits.rows()) != labels.size() || logits.cols() != static_cast<Eigen::Index>(kNumClasses))
    throw ShapeError("softmax_xent: logits/labels shape mismatch");
  XentResult r;
  const Eigen::VectorXd maxes = logits.rowwise().maxCoeff();
  const Matrix shifted = logits.colwise() - maxes;
  const Eigen::VectorXd log_z = shifted.array().exp().rowwise().sum().log();
  r.probs = (shifted.colwise() - log_z).array().exp();
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i)
    total += log_z(static_cast<Eigen::Index>(i)) - shifted(static_cast<Eigen::Index>(i), index_of(labels[i]));
  r.loss = labels.empty() ? 0.0 : total / static_cast<double>(labels.size());
  return r;
}

Matrix softmax_xent_backward(const Matrix& probs, std::span<const Label> labels) {
  Matrix g = probs;
  for (std::size_t i = 0; i < labels.size(); ++i) g(static_cast<Eigen::Index>(i), index_of(labels[i])) -= 1.0;
  if (!labels.empty()) g /= static_cast<double>(labels.size());
  return g;
}

double l2_value(const ParamSet& params, double lambda) {
  if (lambda == 0.0) return 0.0;
  double s = 0.0;
  for (const auto& p : params)
    if (p.role == ParamRole::Weight) s += p.value.squaredNorm();
  return lambda * s;
}

double l2_penalty(ParamSet& params, double lambda) {
  if (lambda < 0.0) throw ConfigError("L2 lambda must be non-negative");
  if (lambda == 0.0) return 0.0;
  double s = 0.0;
  for (auto& p : params) {
    if (p.role != ParamRole::Weight) continue;
    s += p.value.squaredNorm();
    p.grad += (2.0 * lambda) * p.value;
  }
  return lambda * s;
}

double lr_at(const LRSchedule& schedule, int epoch) {
  if (epoch + 1 >= schedule.warmup_epochs) return schedule.base_lr;
  return schedule.base_lr * static_cast<double>(epoch + 1) / static_cast<double>(schedule.warmup_epochs);
}

AdamState::AdamState(const ParamSet& params) {
  for (const auto& p : params) {
    m.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
    v.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
  }
}

void adam_step(AdamState& state, ParamSet& params, double lr) {
  if (state.m.size() != params.size()) throw ShapeError("Adam state does not match the parameter set");
  for (const auto& p : params)
    if (!p.grad.allFinite()) throw NumericError("non-finite gradient in parameter '" + p.name + "'");
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    auto& m = state.m[i];
    auto& v = state.v[i];
    m = state.beta1 * m + (1.0 - state.beta1) * p.grad;
    v = state.beta2 * v + (1.0 - state.beta2) * p.grad.cwiseProduct(p.grad);
    p.value.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + state.epsilon);
    p.grad.setZero();
  }
}

GradCheckResult grad_check(ParamSet& params, const std::function<double(bool)>& objective, double h,
                           std::size_t max_coords, std::uint64_t seed) {
  params.zero_grad();
  objective(true);
  std::vector<Matrix> analytic;
  for (const auto& p : params) analytic.push_back(p.grad);
  params.zero_grad();

  std::vector<std::pair<std::size_t, Eigen::Index>> coords;
  for (std::size_t a = 0; a < params.size(); ++a)
    for (Eigen::Index k = 0; k < params[a].value.size(); ++k) coords.emplace_back(a, k);
  if (coords.size() > max_coords) {
    RngStream rng(seed);
    for (std::size_t i = 0; i < max_coords; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.below(coords.size() - i));
      std::swap(coords[i], coords[j]);
    }
    coords.resize(max_coords);
  }

  GradCheckResult result;
  result.coordinates = coords.size();
  for (auto [a, k] : coords) {
    double& w = params[a].value.data()[k];
    const double saved = w;
    w = saved + h;
    const double up = objective(false);
    w = saved - h;
    const double down = objective(false);
    w = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double exact = analytic[a].data()[k];
    const double rel = std::abs(exact - numeric) / std::max({std::abs(exact), std::abs(numeric), 1e-8});
    if (rel > result.max_rel_error) {
      result.max_rel_error = rel;
      result.worst_param = params[a].name;
    }
  }
  return result;
}

int argmax(std::span<const double> v) noexcept {
  int best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  return best;
}

}  // namespace drr::nn
