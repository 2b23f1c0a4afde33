#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "drr/container.hpp"
#include "drr/corpus.hpp"
#include "drr/nn.hpp"

namespace drr::baselines {

using nn::Matrix;
using Probs = std::array<double, kNumClasses>;

struct SparseVector {
  std::size_t dim = 0;
  std::vector<std::pair<std::uint32_t, double>> entries;  // ascending index

  double squared_norm() const noexcept;
};

/// Every row of a dense matrix as a sparse vector (zeros dropped).
std::vector<SparseVector> to_sparse(const Matrix& x);

// ---- TF-IDF over character n-grams ------------------------------------------

/// Counts of all contiguous n-codepoint substrings, n in [n_min, n_max],
/// whitespace included.
std::map<std::string, int> char_ngrams(std::string_view text, int n_min, int n_max);

struct TfidfModel {
  std::map<std::string, std::uint32_t> vocabulary;
  std::vector<double> idf;
  int n_min = 2;
  int n_max = 5;
};

/// Smoothed idf: ln((1 + N) / (1 + df)) + 1.
TfidfModel tfidf_fit(std::span<const std::string> corpus, int n_min = 2, int n_max = 5);
/// tf * idf over known n-grams, L2-normalized (zero vector if nothing matches).
SparseVector tfidf_transform(const TfidfModel& model, std::string_view text);

// ---- linear models ----------------------------------------------------------

enum class LinearKind { SvmHinge, Logistic };

/// One weight row + intercept per class.
struct LinearModel {
  LinearKind kind = LinearKind::SvmHinge;
  Matrix weights;  // kNumClasses x dim
  Probs intercept{};

  std::size_t dim() const noexcept { return static_cast<std::size_t>(weights.cols()); }
  Probs decision(const SparseVector& x) const;
  Label predict(const SparseVector& x) const;
  /// Softmax of the decision values (no calibration for the SVM).
  Probs predict_proba(const SparseVector& x) const;
};

struct SvmOptions {
  double lambda = 1e-4;
  int epochs = 30;
  std::uint64_t seed = 0;
};

/// One-vs-rest Pegasos: step 1/(lambda*t), hinge subgradient, the intercept is
/// the weight of a constant 1 feature. Samples are visited in a seeded
/// permutation per epoch. Throws DataError unless >= 2 labels are present.
LinearModel svm_train(std::span<const SparseVector> x, std::span<const Label> y, const SvmOptions& opt = {});

struct LogRegOptions {
  double l2 = 1e-4;  // penalty l2 * ||W||^2, intercepts excluded
  int epochs = 500;
};

/// Multinomial logistic regression by full-batch gradient descent with step
/// 1 / (0.5 * mean ||[x,1]||^2 + 2*l2).
LinearModel logreg_train(std::span<const SparseVector> x, std::span<const Label> y, const LogRegOptions& opt = {});

// ---- random forest ----------------------------------------------------------

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  Probs counts{};
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // root at 0

  Probs predict_proba(std::span<const double> x) const;
};

struct ForestOptions {
  int n_trees = 100;
  bool bootstrap = true;
  int max_features = 0;  // 0 means floor(sqrt(d)), at least 1
  std::uint64_t seed = 0;
  int jobs = 1;
};

struct Forest {
  std::vector<DecisionTree> trees;
  int max_features = 1;

  /// Mean of per-tree leaf class distributions.
  Probs predict_proba(std::span<const double> x) const;
  Label predict(std::span<const double> x) const;
};

/// Gini CART trees grown until pure or fewer than two samples.
DecisionTree grow_tree(const Matrix& x, std::span<const Label> y, std::span<const std::size_t> rows,
                       int max_features, RngStream& rng);
Forest rf_train(const Matrix& x, std::span<const Label> y, const ForestOptions& opt = {});

// ---- persistence (shared container format) ----------------------------------

Container to_container(const LinearModel& m);
LinearModel linear_from_container(const Container& c);
Container to_container(const Forest& f);
Forest forest_from_container(const Container& c);
void add_tfidf(Container& c, const TfidfModel& m);
TfidfModel tfidf_from_container(const Container& c);

}  // namespace drr::baselines
