// Command-line front end: one subcommand per pipeline stage.
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "drr/cli.hpp"
#include "drr/error.hpp"
#include "drr/features.hpp"
#include "drr/synthetic.hpp"

namespace {

using drr::cli::RunConfig;

// Flags shared by the config-driven subcommands. Unset flags leave the
// config-file (or default) value alone.
struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::optional<std::string> train, dev, test, embeddings, wordvecs, train_features, test_features, out;
  std::optional<int> max_epochs, k;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "JSON run config");
    app->add_option("--seed", seed, "global seed");
    app->add_option("--jobs", jobs, "worker threads");
    app->add_option("--train", train, "training question file");
    app->add_option("--dev", dev, "development question file");
    app->add_option("--test", test, "test question file");
    app->add_option("--embeddings", embeddings, "sentence-embedding table");
    app->add_option("--wordvecs", wordvecs, "word-vector file");
    app->add_option("--train-features", train_features, "training feature table");
    app->add_option("--test-features", test_features, "test feature table");
    app->add_option("--out", out, "output directory");
    app->add_option("--max-epochs", max_epochs, "epoch cap per model");
    app->add_option("--folds", k, "folds per seed");
  }

  RunConfig resolve() const {
    RunConfig cfg = config.empty() ? RunConfig{} : drr::cli::load_config(config);
    if (seed) cfg.seed = *seed;
    if (jobs) cfg.jobs = *jobs;
    if (train) cfg.train = *train;
    if (dev) cfg.dev = *dev;
    if (test) cfg.test = *test;
    if (embeddings) cfg.embeddings = *embeddings;
    if (wordvecs) cfg.wordvecs = *wordvecs;
    if (train_features) cfg.train_features = *train_features;
    if (test_features) cfg.test_features = *test_features;
    if (out) cfg.output_dir = *out;
    if (max_epochs) cfg.hp.max_epochs = *max_epochs;
    if (k) cfg.k = *k;
    if (cfg.jobs < 1) throw drr::ConfigError("jobs must be >= 1");
    return cfg;
  }
};

struct RuleFlags {
  bool all = false, emoji = false, url = false, datetime = false, ordinal = false, number = false, shouty = false,
       jargon = false;
  std::string jargon_path;

  void attach(CLI::App* app) {
    app->add_flag("--all", all, "enable every rule");
    app->add_flag("--emoji", emoji, "strip emoji");
    app->add_flag("--url", url, "replace URLs");
    app->add_flag("--datetime", datetime, "replace dates and clock times");
    app->add_flag("--ordinal", ordinal, "replace ordinals");
    app->add_flag("--number", number, "replace numbers");
    app->add_flag("--shouty", shouty, "lowercase mostly-uppercase text");
    app->add_flag("--jargon", jargon, "apply the jargon dictionary");
    app->add_option("--jargon-file", jargon_path, "dictionary file (default: built-in)");
  }

  void apply(drr::cli::PreprocessSettings& s) const {
    auto& r = s.rules;
    if (all) {
      r = drr::preprocess::RuleConfig::all_enabled();
      s.jargon = true;
    }
    r.strip_emoji |= emoji;
    r.replace_urls |= url;
    r.replace_datetimes |= datetime;
    r.replace_ordinals |= ordinal;
    r.replace_numbers |= number;
    r.lowercase_if_shouty |= shouty;
    s.jargon |= jargon || !jargon_path.empty();
    if (!jargon_path.empty()) s.jargon_path = jargon_path;
  }
};

int run(int argc, char** argv) {
  CLI::App app{"DRR NN question classification pipeline"};
  app.require_subcommand(1);

  // preprocess
  auto* pre = app.add_subcommand("preprocess", "normalize question text");
  std::string pre_in, pre_out, pre_config;
  RuleFlags pre_rules;
  pre->add_option("input", pre_in, "question file")->required();
  pre->add_option("output", pre_out, "normalized question file")->required();
  pre->add_option("--config", pre_config, "JSON run config (uses its preprocess section)");
  pre_rules.attach(pre);

  // featurize
  auto* feat = app.add_subcommand("featurize", "assemble 815-dim feature tables");
  CommonFlags feat_flags;
  RuleFlags feat_rules;
  feat_flags.attach(feat);
  feat_rules.attach(feat);

  auto* train = app.add_subcommand("train", "train the cross-validated ensemble");
  CommonFlags train_flags;
  train_flags.attach(train);

  auto* predict = app.add_subcommand("predict", "score a feature table with a trained ensemble");
  std::string pred_manifest, pred_features, pred_out = "out";
  bool pred_oof = false;
  predict->add_option("--manifest", pred_manifest, "manifest.json from train")->required();
  predict->add_option("--features", pred_features, "feature table")->required();
  predict->add_option("--out", pred_out, "output directory");
  predict->add_flag("--oof", pred_oof, "score each id only with the models that held it out");
  int unused_jobs = 1;
  std::uint64_t unused_seed = 0;
  predict->add_option("--jobs", unused_jobs, "accepted for uniformity");
  predict->add_option("--seed", unused_seed, "accepted for uniformity");

  auto* evaluate = app.add_subcommand("evaluate", "score a label file against gold questions");
  std::string ev_gold, ev_labels, ev_out;
  evaluate->add_option("--gold", ev_gold, "question file with labels")->required();
  evaluate->add_option("--labels", ev_labels, "label file")->required();
  evaluate->add_option("--out", ev_out, "output directory for report.txt and metrics.json");

  auto* hpo = app.add_subcommand("hpo", "random hyperparameter search");
  CommonFlags hpo_flags;
  int budget = 20;
  hpo_flags.attach(hpo);
  hpo->add_option("--budget", budget, "number of sampled configurations");

  auto* base = app.add_subcommand("baseline", "train a baseline classifier");
  CommonFlags base_flags;
  RuleFlags base_rules;
  std::string base_kind;
  bool base_oof = false;
  base->add_option("kind", base_kind, "tfidf-svm | logreg | forest")->required();
  base->add_flag("--oof", base_oof, "also write out-of-fold training probabilities");
  base_flags.attach(base);
  base_rules.attach(base);

  auto* stack = app.add_subcommand("stack", "train a stacking ensemble over probability matrices");
  drr::cli::StackArgs stack_args;
  std::string stack_kind;
  stack->add_option("kind", stack_kind, "c1 | c2")->required();
  stack->add_option("--probs", stack_args.train_probs, "training probability matrices")->required();
  stack->add_option("--labels", stack_args.labels, "question file with gold labels")->required();
  stack->add_option("--predict", stack_args.predict_probs, "probability matrices to label (default: --probs)");
  stack->add_option("--out", stack_args.output_dir, "output directory");
  stack->add_option("--seed", stack_args.seed, "global seed");
  stack->add_option("--jobs", stack_args.jobs, "worker threads");

  auto* synth = app.add_subcommand("synth", "write a synthetic Gaussian-blob corpus");
  drr::synthetic::BlobOptions blob;
  std::string synth_out = "synth";
  synth->add_option("--out", synth_out, "output directory");
  synth->add_option("--seed", blob.seed, "generator seed");
  synth->add_option("--train-size", blob.n_train, "training questions");
  synth->add_option("--test-size", blob.n_test, "test questions");
  synth->add_option("--spread", blob.class_spread, "std of class means");
  synth->add_option("--noise", blob.noise, "per-sample std");

  auto* rand_emb = app.add_subcommand("random-embeddings", "deterministic unit-norm embedding table keyed by id");
  std::string re_in, re_out;
  std::uint64_t re_seed = 0;
  std::size_t re_dim = drr::features::kSentenceDim;
  rand_emb->add_option("input", re_in, "question file")->required();
  rand_emb->add_option("output", re_out, "embedding table")->required();
  rand_emb->add_option("--seed", re_seed, "generator seed");
  rand_emb->add_option("--dim", re_dim, "vector width");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    for (auto& c : msg)
      if (c == '\n') c = ' ';
    std::cerr << "error: config: " << msg << "\n";
    return 1;
  }

  if (*pre) {
    drr::cli::PreprocessSettings s = pre_config.empty() ? drr::cli::PreprocessSettings{}
                                                        : drr::cli::load_config(pre_config).preprocess;
    pre_rules.apply(s);
    drr::cli::cmd_preprocess(pre_in, pre_out, s);
  } else if (*feat) {
    auto cfg = feat_flags.resolve();
    feat_rules.apply(cfg.preprocess);
    drr::cli::cmd_featurize(cfg);
  } else if (*train) {
    drr::cli::cmd_train(train_flags.resolve());
  } else if (*predict) {
    drr::cli::cmd_predict(pred_manifest, pred_features, pred_out, pred_oof);
  } else if (*evaluate) {
    const auto report = drr::cli::cmd_evaluate(ev_gold, ev_labels, ev_out);
    std::cout << drr::eval::format_report(report);
  } else if (*hpo) {
    if (budget < 1) throw drr::ConfigError("budget must be >= 1");
    drr::cli::cmd_hpo(hpo_flags.resolve(), budget);
  } else if (*base) {
    auto cfg = base_flags.resolve();
    base_rules.apply(cfg.preprocess);
    drr::cli::cmd_baseline(drr::cli::parse_baseline_kind(base_kind), cfg, base_oof);
  } else if (*stack) {
    if (stack_kind == "c1") stack_args.kind = drr::cli::StackKind::C1;
    else if (stack_kind == "c2") stack_args.kind = drr::cli::StackKind::C2;
    else throw drr::ConfigError("unknown stacker '" + stack_kind + "' (expected c1 or c2)");
    if (stack_args.jobs < 1) throw drr::ConfigError("jobs must be >= 1");
    drr::cli::cmd_stack(stack_args);
  } else if (*synth) {
    const auto corpus = drr::synthetic::make_blob_corpus(blob);
    const std::filesystem::path dir = synth_out;
    std::filesystem::create_directories(dir);
    drr::save_questions(corpus.train, dir / "train.jsonl");
    drr::save_questions(corpus.test, dir / "test.jsonl");
    drr::features::save_embedding_table(corpus.embeddings, dir / "embeddings.tsv");
    drr::features::save_wordvecs(corpus.wordvecs, dir / "wordvecs.vec");
  } else if (*rand_emb) {
    const auto ds = drr::load_questions(re_in);
    const auto ids = ds.ids();
    drr::features::save_embedding_table(drr::features::random_embedding_table(ids, re_dim, re_seed), re_out);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const drr::Error& e) {
    std::string msg = e.what();
    for (auto& c : msg)
      if (c == '\n') c = ' ';
    std::cerr << "error: " << e.kind() << ": " << msg << "\n";
    return e.exit_code();
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: data: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 2;
  }
}
