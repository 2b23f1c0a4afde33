#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "drr/baselines.hpp"
#include "drr/drrnn.hpp"
#include "drr/eval.hpp"
#include "drr/preprocess.hpp"

namespace drr::cli {

struct PreprocessSettings {
  preprocess::RuleConfig rules;  // jargon_dict filled from `jargon` when set
  bool jargon = false;           // apply the dictionary
  std::string jargon_path;       // empty: built-in dictionary

  /// Rules with the dictionary resolved.
  preprocess::RuleConfig resolve() const;
  bool any() const;
};

struct BaselineSettings {
  int ngram_min = 2;
  int ngram_max = 5;
  double svm_lambda = 1e-4;
  int svm_epochs = 30;
  double logreg_l2 = 1e-4;
  int logreg_epochs = 500;
  int forest_trees = 100;
};

/// Everything a subcommand needs. Precedence: flags > config file > defaults.
struct RunConfig {
  std::string train;  // question files
  std::string dev;
  std::string test;
  std::string embeddings;      // sentence-embedding table (dim 512)
  std::string wordvecs;        // "count dim" text vectors (dim 300)
  std::string train_features;  // assembled tables (dim 815)
  std::string test_features;
  std::string output_dir = "out";

  drrnn::HyperParams hp;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4};
  int k = 5;
  std::uint64_t seed = 0;
  int jobs = 1;

  PreprocessSettings preprocess;
  drrnn::SearchSpace search;
  BaselineSettings baselines;
};

nlohmann::ordered_json to_json(const RunConfig& cfg);
/// Overlays the keys present in `j` on `base`; unknown keys are a ConfigError.
RunConfig from_json(const nlohmann::json& j, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path);
/// Writes `<dir>/config.json`.
void write_config(const RunConfig& cfg, const std::filesystem::path& dir);

struct ManifestEntry {
  std::filesystem::path checkpoint;  // absolute or relative to the manifest
  drrnn::SplitId split;
  double best_val_acc = 0.0;
  int best_epoch = 0;
  std::vector<std::string> val_ids;
};

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path);

// ---- subcommands ------------------------------------------------------------

/// Normalizes subject and body of every question.
void cmd_preprocess(const std::filesystem::path& in, const std::filesystem::path& out,
                    const PreprocessSettings& settings);

/// Writes features_<split>.tsv (dim 815) for each configured split and the
/// training category statistics.
void cmd_featurize(const RunConfig& cfg);

/// Trains the 20-model ensemble; writes checkpoints/, manifest.json and
/// train_log.tsv.
void cmd_train(const RunConfig& cfg);

/// Writes probs.tsv (mean softmax) and labels.tsv. With `oof`, each id is
/// scored only by the models that held it out.
void cmd_predict(const std::filesystem::path& manifest, const std::filesystem::path& features,
                 const std::filesystem::path& out_dir, bool oof = false);

/// Returns the report; writes report.txt and metrics.json when out_dir is set.
eval::MetricsReport cmd_evaluate(const std::filesystem::path& gold, const std::filesystem::path& labels,
                           const std::filesystem::path& out_dir);

void cmd_hpo(const RunConfig& cfg, int budget);

enum class BaselineKind { TfidfSvm, LogReg, Forest };
BaselineKind parse_baseline_kind(const std::string& s);

/// Trains on the training split, predicts the test split when configured,
/// and with `oof` also writes out-of-fold probabilities for the training set.
void cmd_baseline(BaselineKind kind, const RunConfig& cfg, bool oof);

enum class StackKind { C1, C2 };

struct StackArgs {
  StackKind kind = StackKind::C1;
  std::vector<std::filesystem::path> train_probs;
  std::filesystem::path labels;  // question file with gold labels
  std::vector<std::filesystem::path> predict_probs;  // defaults to train_probs
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 0;
  int jobs = 1;
};

void cmd_stack(const StackArgs& args);

}  // namespace drr::cli
