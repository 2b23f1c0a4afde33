#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "drr/corpus.hpp"
#include "drr/rng.hpp"

namespace drr::nn {

/// Row-major so that one sample is one contiguous row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::RowVectorXd;

enum class ParamRole { Weight, Bias, NormGain, NormBias };

/// One learnable array. Vectors are stored as 1 x n matrices and reported
/// with shape (n,).
struct ParamArray {
  std::string name;
  ParamRole role = ParamRole::Weight;
  Matrix value;
  Matrix grad;

  bool is_vector() const noexcept { return role != ParamRole::Weight; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(value.size()); }
};

class ParamSet {
 public:
  /// Adds a zero-initialized array; returns its index.
  std::size_t add(std::string name, ParamRole role, Eigen::Index rows, Eigen::Index cols);

  ParamArray& operator[](std::size_t i) { return arrays_[i]; }
  const ParamArray& operator[](std::size_t i) const { return arrays_[i]; }
  ParamArray& at(const std::string& name);
  const ParamArray& at(const std::string& name) const;

  std::size_t size() const noexcept { return arrays_.size(); }
  auto begin() { return arrays_.begin(); }
  auto end() { return arrays_.end(); }
  auto begin() const { return arrays_.begin(); }
  auto end() const { return arrays_.end(); }

  /// Total number of learnable scalars.
  std::size_t scalar_count() const noexcept;
  void zero_grad();
  /// Copies values from `other`, which must have identical names and shapes.
  void copy_values_from(const ParamSet& other);

 private:
  std::deque<ParamArray> arrays_;  // stable references across add()
};

// ---- layers (batched: one sample per row) ----------------------------------

/// y = xW + b.
Matrix dense_forward(const Matrix& x, const ParamArray& w, const ParamArray& b);
/// Accumulates dW and db; returns dL/dx.
Matrix dense_backward(const Matrix& x, const Matrix& dy, ParamArray& w, ParamArray& b);

Matrix relu_forward(const Matrix& x);
/// Passes dy where x > 0 (zero gradient at x == 0).
Matrix relu_backward(const Matrix& x, const Matrix& dy);

struct LayerNormCache {
  Matrix xhat;
  Eigen::VectorXd inv_std;
};

inline constexpr double kLayerNormEps = 1e-5;

/// Per-row normalization with biased variance, then gain/bias.
Matrix layer_norm_forward(const Matrix& x, const ParamArray& gain, const ParamArray& bias,
                          LayerNormCache* cache = nullptr, double eps = kLayerNormEps);
Matrix layer_norm_backward(const Matrix& dy, const LayerNormCache& cache, ParamArray& gain,
                           ParamArray& bias);

/// Inverted-dropout mask: 0 for dropped units, 1/(1-p) for kept ones. An
/// empty mask means identity.
struct DropoutMask {
  Matrix scale;
  bool identity() const noexcept { return scale.size() == 0; }
};

/// Throws ConfigError unless 0 <= p < 1. Inference or p == 0 is the identity
/// and draws nothing from `rng`.
Matrix dropout_forward(const Matrix& x, double p, RngStream& rng, bool training, DropoutMask& mask);
Matrix dropout_backward(const Matrix& dy, const DropoutMask& mask);

/// Row-wise softmax with max subtraction.
Matrix softmax(const Matrix& logits);

struct XentResult {
  double loss = 0.0;  // mean over rows
  Matrix probs;
};

XentResult softmax_xent(const Matrix& logits, std::span<const Label> labels);
/// (probs - onehot) / batch, the gradient of the mean loss.
Matrix softmax_xent_backward(const Matrix& probs, std::span<const Label> labels);

/// lambda * sum(w^2) over Weight arrays only; adds 2*lambda*w to their grads.
double l2_penalty(ParamSet& params, double lambda);
/// Same value without touching gradients.
double l2_value(const ParamSet& params, double lambda);

// ---- optimization -----------------------------------------------------------

struct LRSchedule {
  double base_lr = 6e-3;
  int warmup_epochs = 500;
};

/// base_lr * min(1, (epoch + 1) / warmup_epochs).
double lr_at(const LRSchedule& schedule, int epoch);

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::int64_t step = 0;
  std::vector<Matrix> m;
  std::vector<Matrix> v;

  explicit AdamState(const ParamSet& params);
};

/// One bias-corrected Adam update; zeroes gradients afterwards. Throws
/// NumericError naming the first parameter with a non-finite gradient.
void adam_step(AdamState& state, ParamSet& params, double lr);

// ---- verification -----------------------------------------------------------

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t coordinates = 0;
  std::string worst_param;
};

/// `objective(with_grad)` returns the loss at the current parameter values;
/// when `with_grad` is true it must also accumulate analytic gradients into
/// the (pre-zeroed) grads. Central differences with step h are compared on
/// `max_coords` coordinates sampled without replacement (all of them if the
/// set is smaller). Relative error is |a-n| / max(|a|, |n|, 1e-8).
GradCheckResult grad_check(ParamSet& params, const std::function<double(bool)>& objective,
                           double h = 1e-4, std::size_t max_coords = 1000, std::uint64_t seed = 7);

int argmax(std::span<const double> v) noexcept;

}  // namespace drr::nn
