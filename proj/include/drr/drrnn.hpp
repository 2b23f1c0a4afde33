#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "drr/corpus.hpp"
#include "drr/nn.hpp"
#include "drr/rng.hpp"

namespace drr::drrnn {

using nn::Matrix;

struct HyperParams {
  int input_dim = 815;
  int block_dim = 81;
  int n_blocks = 12;
  double input_dropout = 0.73;
  double block_dropout = 0.17;
  double base_lr = 6e-3;
  int warmup_epochs = 500;
  double l2_lambda = 0.14;
  int max_epochs = 700;
  int n_classes = 3;

  /// Throws ConfigError describing the first invalid field.
  void validate() const;
  /// input_dim*block_dim + block_dim + n_blocks*(block_dim^2 + 3*block_dim)
  ///   + block_dim*n_classes + n_classes
  std::size_t param_count() const noexcept;

  bool operator==(const HyperParams&) const = default;
};

struct SplitId {
  int seed_index = -1;
  int fold_index = -1;
  bool operator==(const SplitId&) const = default;
};

/// All learnable arrays of one network plus its training provenance.
struct ModelCheckpoint {
  HyperParams hp;
  nn::ParamSet params;
  double best_val_acc = 0.0;
  int best_epoch = 0;
  SplitId split;
};

/// Input projection (input_dim -> block_dim), n_blocks residual blocks of
/// dense + layer norm, output projection (block_dim -> n_classes). Weights are
/// Glorot-uniform, biases zero, norm gains one.
ModelCheckpoint build_model(const HyperParams& hp, RngStream& rng);

/// Activations kept for the backward pass.
struct ForwardCache {
  Matrix input;  // after input dropout
  nn::DropoutMask input_mask;
  struct Block {
    Matrix in;
    Matrix pre;  // dense output, before ReLU
    nn::LayerNormCache norm;
    nn::DropoutMask mask;
  };
  std::vector<Block> blocks;
  Matrix last;  // input to the output projection
};

/// Batched forward pass (one sample per row):
///   dropout -> projection -> [dense -> ReLU -> +skip -> layer norm -> dropout] x n -> projection.
/// With training=false dropouts are identity and `rng` may be null.
Matrix forward(const ModelCheckpoint& m, const Matrix& x, bool training, RngStream* rng,
               ForwardCache* cache = nullptr);
/// Accumulates parameter gradients for upstream logits gradient `dlogits`.
void backward(ModelCheckpoint& m, const ForwardCache& cache, const Matrix& dlogits);

/// Single-sample evaluation.
std::vector<double> forward(const ModelCheckpoint& m, std::span<const double> x, bool training,
                            RngStream* rng);

/// Eval-mode argmax predictions (ties to the lowest class index).
std::vector<Label> predict(const ModelCheckpoint& m, const Matrix& x);
double accuracy(const ModelCheckpoint& m, const Matrix& x, std::span<const Label> y);

/// Rows of `x` selected by index.
Matrix gather_rows(const Matrix& x, std::span<const std::size_t> rows);
template <typename T>
std::vector<T> gather(std::span<const T> v, std::span<const std::size_t> idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(v[i]);
  return out;
}

// ---- cross-validation splits -----------------------------------------------

struct SplitPair {
  SplitId id;
  std::vector<std::size_t> learn;  // dataset row indices, ascending
  std::vector<std::size_t> val;
};

struct SplitPlan {
  std::vector<std::uint64_t> seeds;
  int k = 5;
  std::vector<SplitPair> pairs;  // seed-major, then fold
};

/// Stratified k-fold assignment for one seed: fold index per row. Each
/// present class is shuffled and dealt round-robin, continuing the fold
/// offset across classes. Throws DataError if a present class has < k rows.
std::vector<int> stratified_folds(std::span<const Label> labels, int k, std::uint64_t seed);

SplitPlan make_splits(std::span<const Label> labels, std::span<const std::uint64_t> seeds, int k = 5);

// ---- training ---------------------------------------------------------------

struct TrainLog {
  std::vector<double> val_accuracy;  // index e = after e epochs (0 = untrained)
  std::vector<double> train_loss;    // index e = loss at epoch e (before its update)
  std::vector<double> train_accuracy;  // index e = accuracy of the dropout-active pass at epoch e
};

/// Full-batch training; keeps the snapshot with the best validation accuracy
/// (ties to the earlier epoch). Throws NumericError on a non-finite loss.
ModelCheckpoint train_single(const Matrix& learn_x, std::span<const Label> learn_y, const Matrix& val_x,
                             std::span<const Label> val_y, const HyperParams& hp, std::uint64_t seed,
                             TrainLog* log = nullptr);

struct EnsembleConfig {
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4};
  int k = 5;
  std::uint64_t global_seed = 0;
  int jobs = 1;
};

/// Seed for the run on split (seed_index, fold_index).
std::uint64_t run_seed(std::uint64_t global_seed, int seed_index, int fold_index);

/// One train_single per split pair, in plan order. Output does not depend on
/// `jobs`.
std::vector<ModelCheckpoint> train_ensemble(const Matrix& x, std::span<const Label> y, const HyperParams& hp,
                                            const EnsembleConfig& cfg, const SplitPlan* plan = nullptr);

struct EnsemblePrediction {
  Label label = Label::Factual;
  std::array<double, kNumClasses> summed_probs{};
};

/// argmax of the summed per-model softmax; ties to the lowest class index.
EnsemblePrediction ensemble_predict(std::span<const ModelCheckpoint> models, std::span<const double> x);
/// Batched form; row i of the result is the summed softmax for row i of x.
Matrix ensemble_summed_probs(std::span<const ModelCheckpoint> models, const Matrix& x);

// ---- hyperparameter search --------------------------------------------------

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};
struct IntRange {
  int lo = 0;
  int hi = 0;
};

/// lr and l2 are sampled log-uniformly, the rest uniformly.
struct SearchSpace {
  Range base_lr{1e-4, 1e-2};
  Range l2_lambda{1e-3, 1.0};
  Range input_dropout{0.0, 0.8};
  Range block_dropout{0.0, 0.8};
  IntRange n_blocks{2, 16};
  IntRange block_dim{32, 256};

  /// Throws ConfigError on an empty (lo > hi) or invalid range.
  void validate() const;
};

struct SearchTrial {
  HyperParams hp;
  double cv_accuracy = 0.0;
};

struct SearchResult {
  HyperParams best_hp;
  double cv_accuracy = 0.0;
  std::vector<SearchTrial> trials;
};

/// Samples `budget` points around `base` (fields outside the space are kept)
/// and scores each by the mean best validation accuracy over a single-seed
/// stratified k-fold. Every sample sees the same folds and the same
/// per-fold training seeds. Best score wins, ties to the earlier sample.
SearchResult random_search(const SearchSpace& space, int budget, const Matrix& x, std::span<const Label> y,
                           const HyperParams& base, int k, std::uint64_t seed, int jobs = 1);

// ---- persistence ------------------------------------------------------------

void save_checkpoint(const ModelCheckpoint& m, const std::filesystem::path& path);
/// Throws VersionError, ShapeError or TruncatedError for the matching defect.
ModelCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace drr::drrnn
