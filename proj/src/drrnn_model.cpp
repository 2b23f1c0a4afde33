#include "drr/drrnn.hpp"

#include <cmath>

#include "drr/error.hpp"

namespace drr::drrnn {

namespace {

constexpr std::size_t kInputW = 0, kInputB = 1;
std::size_t block_base(int b) { return 2 + 4 * static_cast<std::size_t>(b); }
std::size_t output_w(const HyperParams& hp) { return block_base(hp.n_blocks); }

std::string block_name(int b, const char* leaf) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "block%02d/%s", b, leaf);
  return buf;
}

void glorot_uniform(nn::ParamArray& p, RngStream& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(p.value.rows() + p.value.cols()));
  for (Eigen::Index i = 0; i < p.value.size(); ++i) p.value.data()[i] = rng.uniform(-limit, limit);
}

}  // namespace

void HyperParams::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("invalid hyperparameter: " + what); };
  if (input_dim <= 0) fail("input_dim must be positive");
  if (block_dim <= 0) fail("block_dim must be positive");
  if (n_blocks <= 0) fail("n_blocks must be positive");
  if (n_classes != static_cast<int>(kNumClasses)) fail("n_classes must be 3");
  if (!(input_dropout >= 0.0 && input_dropout < 1.0)) fail("input_dropout must be in [0,1)");
  if (!(block_dropout >= 0.0 && block_dropout < 1.0)) fail("block_dropout must be in [0,1)");
  if (!(base_lr > 0.0)) fail("base_lr must be positive");
  if (warmup_epochs < 1) fail("warmup_epochs must be >= 1");
  if (!(l2_lambda >= 0.0)) fail("l2_lambda must be non-negative");
  if (max_epochs < 0) fail("max_epochs must be non-negative");
}

std::size_t HyperParams::param_count() const noexcept {
  const auto in = static_cast<std::size_t>(input_dim), d = static_cast<std::size_t>(block_dim),
             n = static_cast<std::size_t>(n_blocks), c = static_cast<std::size_t>(n_classes);
  return in * d + d + n * (d * d + d + 2 * d) + d * c + c;
}

ModelCheckpoint build_model(const HyperParams& hp, RngStream& rng) {
  hp.validate();
  ModelCheckpoint m;
  m.hp = hp;
  auto& ps = m.params;
  using nn::ParamRole;
  ps.add("input/W", ParamRole::Weight, hp.input_dim, hp.block_dim);
  ps.add("input/b", ParamRole::Bias, 1, hp.block_dim);
  for (int b = 0; b < hp.n_blocks; ++b) {
    ps.add(block_name(b, "W"), ParamRole::Weight, hp.block_dim, hp.block_dim);
    ps.add(block_name(b, "b"), ParamRole::Bias, 1, hp.block_dim);
    ps.add(block_name(b, "ln_gain"), ParamRole::NormGain, 1, hp.block_dim);
    ps.add(block_name(b, "ln_bias"), ParamRole::NormBias, 1, hp.block_dim);
  }
  ps.add("output/W", ParamRole::Weight, hp.block_dim, hp.n_classes);
  ps.add("output/b", ParamRole::Bias, 1, hp.n_classes);

  for (auto& p : ps) {
    if (p.role == ParamRole::Weight) glorot_uniform(p, rng);
    if (p.role == ParamRole::NormGain) p.value.setOnes();
  }
  return m;
}

Matrix forward(const ModelCheckpoint& m, const Matrix& x, bool training, RngStream* rng, ForwardCache* cache) {
  const auto& hp = m.hp;
  const auto& ps = m.params;
  if (x.cols() != hp.input_dim) {
    throw ShapeError("input has " + std::to_string(x.cols()) + " features, model expects " +
                     std::to_string(hp.input_dim));
  }
  if (training && !rng && (hp.input_dropout > 0.0 || hp.block_dropout > 0.0))
    throw ConfigError("training-mode forward needs a random stream");
  RngStream unused(0);
  RngStream& r = rng ? *rng : unused;

  ForwardCache local;
  ForwardCache& c = cache ? *cache : local;
  c.blocks.resize(static_cast<std::size_t>(hp.n_blocks));

  c.input = nn::dropout_forward(x, hp.input_dropout, r, training, c.input_mask);
  Matrix h = nn::dense_forward(c.input, ps[kInputW], ps[kInputB]);
  for (int b = 0; b < hp.n_blocks; ++b) {
    auto& bc = c.blocks[static_cast<std::size_t>(b)];
    const auto base = block_base(b);
    bc.in = std::move(h);
    bc.pre = nn::dense_forward(bc.in, ps[base], ps[base + 1]);
    Matrix sum = bc.in + nn::relu_forward(bc.pre);
    Matrix normed = nn::layer_norm_forward(sum, ps[base + 2], ps[base + 3], &bc.norm);
    h = nn::dropout_forward(normed, hp.block_dropout, r, training, bc.mask);
  }
  c.last = std::move(h);
  const auto ow = output_w(hp);
  return nn::dense_forward(c.last, ps[ow], ps[ow + 1]);
}

void backward(ModelCheckpoint& m, const ForwardCache& c, const Matrix& dlogits) {
  const auto& hp = m.hp;
  auto& ps = m.params;
  const auto ow = output_w(hp);
  Matrix d = nn::dense_backward(c.last, dlogits, ps[ow], ps[ow + 1]);
  for (int b = hp.n_blocks - 1; b >= 0; --b) {
    const auto& bc = c.blocks[static_cast<std::size_t>(b)];
    const auto base = block_base(b);
    d = nn::dropout_backward(d, bc.mask);
    Matrix dsum = nn::layer_norm_backward(d, bc.norm, ps[base + 2], ps[base + 3]);
    Matrix dpre = nn::relu_backward(bc.pre, dsum);
    d = dsum + nn::dense_backward(bc.in, dpre, ps[base], ps[base + 1]);
  }
  // The input gradient is not needed; only the projection parameters are.
  ps[kInputW].grad.noalias() += c.input.transpose() * d;
  ps[kInputB].grad.row(0) += d.colwise().sum();
}

std::vector<double> forward(const ModelCheckpoint& m, std::span<const double> x, bool training, RngStream* rng) {
  Matrix row(1, static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) row(0, static_cast<Eigen::Index>(i)) = x[i];
  const Matrix logits = forward(m, row, training, rng);
  return {logits.data(), logits.data() + logits.size()};
}

std::vector<Label> predict(const ModelCheckpoint& m, const Matrix& x) {
  const Matrix logits = forward(m, x, false, nullptr);
  std::vector<Label> out;
  out.reserve(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index i = 0; i < logits.rows(); ++i)
    out.push_back(label_from_index(nn::argmax({logits.row(i).data(), static_cast<std::size_t>(logits.cols())})));
  return out;
}

double accuracy(const ModelCheckpoint& m, const Matrix& x, std::span<const Label> y) {
  if (y.empty()) return 0.0;
  const auto pred = predict(m, x);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < y.size(); ++i) hits += pred[i] == y[i];
  return static_cast<double>(hits) / static_cast<double>(y.size());
}

Matrix gather_rows(const Matrix& x, std::span<const std::size_t> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(rows[i]));
  return out;
}

Matrix ensemble_summed_probs(std::span<const ModelCheckpoint> models, const Matrix& x) {
  if (models.empty()) throw ConfigError("ensemble needs at least one model");
  Matrix sum = Matrix::Zero(x.rows(), static_cast<Eigen::Index>(kNumClasses));
  for (const auto& m : models) {
    if (m.hp.input_dim != models.front().hp.input_dim) throw ShapeError("ensemble members disagree on input_dim");
    sum += nn::softmax(forward(m, x, false, nullptr));
  }
  return sum;
}

EnsemblePrediction ensemble_predict(std::span<const ModelCheckpoint> models, std::span<const double> x) {
  Matrix row(1, static_cast<Eigen::Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) row(0, static_cast<Eigen::Index>(i)) = x[i];
  const Matrix sum = ensemble_summed_probs(models, row);
  EnsemblePrediction p;
  for (std::size_t c = 0; c < kNumClasses; ++c) p.summed_probs[c] = sum(0, static_cast<Eigen::Index>(c));
  p.label = label_from_index(nn::argmax(p.summed_probs));
  return p;
}

}  // namespace drr::drrnn
