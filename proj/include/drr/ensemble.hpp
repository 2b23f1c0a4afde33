#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "drr/baselines.hpp"
#include "drr/corpus.hpp"

namespace drr::ensemble {

using baselines::Probs;
using nn::Matrix;

/// Per-question class probabilities emitted by one system.
class ProbMatrix {
 public:
  std::string system_name;

  const std::vector<std::string>& ids() const noexcept { return ids_; }
  const std::vector<Probs>& rows() const noexcept { return rows_; }
  std::size_t size() const noexcept { return ids_.size(); }

  /// Throws DataError on a duplicate id.
  void add(std::string id, const Probs& p);
  const Probs* find(const std::string& id) const;

 private:
  std::vector<std::string> ids_;
  std::vector<Probs> rows_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// `#system=<name>`, `#classes=FACTUAL,OPINION,SOCIALIZING`, then
/// `id<TAB>p0 p1 p2`. Rows off by more than 1e-4 from sum 1 are rejected;
/// rows off by more than 1e-6 are renormalized and reported in `warnings`
/// (or on stderr when `warnings` is null).
ProbMatrix parse_prob_matrix(std::string_view text, std::vector<std::string>* warnings = nullptr);
ProbMatrix load_prob_matrix(const std::filesystem::path& path, std::vector<std::string>* warnings = nullptr);
std::string format_prob_matrix(const ProbMatrix& m);
void save_prob_matrix(const ProbMatrix& m, const std::filesystem::path& path);

/// Concatenated probability rows of S systems, one row per id: width 3*S,
/// system order as given.
struct MetaFeatures {
  std::vector<std::string> ids;
  Matrix values;
  std::size_t n_systems = 0;
};

/// Throws DataError listing ids missing from any base.
MetaFeatures build_meta_features(std::span<const ProbMatrix> bases, std::span<const std::string> ids);

/// Trains on `train_rows` and returns probabilities for `predict_rows`, both
/// indices into the caller's dataset.
using ProbTrainer =
    std::function<std::vector<Probs>(std::span<const std::size_t> train_rows, std::span<const std::size_t> predict_rows)>;

/// Out-of-fold probabilities: each id is predicted by a model trained on the
/// other k-1 stratified folds.
ProbMatrix oof_probs(const ProbTrainer& trainer, std::span<const std::string> ids, std::span<const Label> labels,
                     int k, std::uint64_t seed, std::string system_name);

/// Contrastive-1: a linear SVM over the meta-features.
struct StackerC1 {
  std::size_t n_systems = 0;
  baselines::LinearModel svm;

  std::vector<Label> predict(std::span<const ProbMatrix> bases, std::span<const std::string> ids) const;
};

StackerC1 stack_train_c1(std::span<const ProbMatrix> bases, std::span<const std::string> ids,
                         std::span<const Label> labels, const baselines::SvmOptions& svm = {1e-4, 200, 0});

/// Hard majority of logistic regression, random forest and linear SVM; a
/// three-way split defers to the logistic regression.
struct VotingEstimator {
  baselines::LinearModel logreg;
  baselines::Forest forest;
  baselines::LinearModel svm;

  Label predict(std::span<const double> row) const;
};

struct C2Options {
  int n_bags = 10;
  bool bootstrap = true;
  std::uint64_t seed = 0;
  int jobs = 1;
  baselines::LogRegOptions logreg{1e-4, 500};
  baselines::SvmOptions svm{1e-4, 200, 0};
  int forest_trees = 100;
};

/// Contrastive-2: bagging of voting estimators; final vote ties go to the
/// lowest class index.
struct StackerC2 {
  std::size_t n_systems = 0;
  std::vector<VotingEstimator> bags;

  std::vector<Label> predict(std::span<const ProbMatrix> bases, std::span<const std::string> ids) const;
};

StackerC2 stack_train_c2(std::span<const ProbMatrix> bases, std::span<const std::string> ids,
                         std::span<const Label> labels, const C2Options& opt = {});

}  // namespace drr::ensemble
