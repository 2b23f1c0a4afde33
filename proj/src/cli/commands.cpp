#include <algorithm>
#include <cstdio>
#include <iostream>
#include <memory>
#include <numeric>
#include <optional>
#include <unordered_map>
#include <unordered_set>

#include "drr/cli.hpp"
#include "drr/ensemble.hpp"
#include "drr/error.hpp"
#include "drr/features.hpp"
#include "drr/textio.hpp"

namespace drr::cli {

namespace fs = std::filesystem;
using drrnn::Matrix;
using nlohmann::ordered_json;

namespace {

void require(const std::string& value, const char* key) {
  if (value.empty()) throw ConfigError(std::string("config needs '") + key + "'");
}

// Feature rows for the questions of `ds`, in dataset order.
Matrix feature_rows(const Dataset& ds, const features::EmbeddingTable& table) {
  Matrix x(static_cast<Eigen::Index>(ds.size()), static_cast<Eigen::Index>(table.dim()));
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto row = table.row(ds.questions[i].id);
    std::copy(row.begin(), row.end(), x.row(static_cast<Eigen::Index>(i)).data());
  }
  return x;
}

Matrix table_rows(const features::EmbeddingTable& table) {
  Matrix x(static_cast<Eigen::Index>(table.size()), static_cast<Eigen::Index>(table.dim()));
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto row = table.row_at(i);
    std::copy(row.begin(), row.end(), x.row(static_cast<Eigen::Index>(i)).data());
  }
  return x;
}

std::string question_text(const Question& q, const PreprocessSettings& pre, const preprocess::RuleConfig& rules) {
  return pre.any() ? preprocess::normalize(concat_text(q), rules) : concat_text(q);
}

std::string split_name(drrnn::SplitId id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "s%d_f%d", id.seed_index, id.fold_index);
  return buf;
}

ensemble::Probs row_probs(const Matrix& m, Eigen::Index i) {
  return {m(i, 0), m(i, 1), m(i, 2)};
}

}  // namespace

void cmd_preprocess(const fs::path& in, const fs::path& out, const PreprocessSettings& settings) {
  auto ds = load_questions(in);
  const auto rules = settings.resolve();
  for (auto& q : ds.questions) {
    q.subject = preprocess::normalize(q.subject, rules);
    q.body = preprocess::normalize(q.body, rules);
  }
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  save_questions(ds, out);
}

void cmd_featurize(const RunConfig& cfg) {
  require(cfg.train, "train");
  require(cfg.embeddings, "embeddings");
  require(cfg.wordvecs, "wordvecs");
  const fs::path out = cfg.output_dir;
  write_config(cfg, out);

  const auto emb = features::load_embedding_table(cfg.embeddings, features::kSentenceDim);
  const auto wv = features::load_wordvecs(cfg.wordvecs);
  const auto rules = cfg.preprocess.resolve();
  auto prepared = [&](Dataset ds) {
    if (cfg.preprocess.any()) {
      // Only the text-derived word average sees the normalized text.
      for (auto& q : ds.questions) {
        q.subject = preprocess::normalize(q.subject, rules);
        q.body = preprocess::normalize(q.body, rules);
      }
    }
    return ds;
  };
  const auto train = prepared(load_questions(cfg.train));
  const auto stats = features::fit_category_stats(train);
  write_file(out / "category_stats.json", features::category_stats_to_json(stats));

  const std::pair<const char*, const std::string*> splits[] = {{"train", &cfg.train}, {"dev", &cfg.dev}, {"test", &cfg.test}};
  for (const auto& [name, path] : splits) {
    if (path->empty()) continue;
    const auto ds = std::string(name) == "train" ? train : prepared(load_questions(*path));
    features::save_embedding_table(features::featurize(ds, emb, wv, stats),
                                   out / (std::string("features_") + name + ".tsv"));
  }
}

void cmd_train(const RunConfig& cfg) {
  require(cfg.train, "train");
  require(cfg.train_features, "train_features");
  cfg.hp.validate();
  const fs::path out = cfg.output_dir;
  write_config(cfg, out);

  const auto ds = load_questions(cfg.train);
  const auto y = ds.labels();
  const auto table = features::load_embedding_table(cfg.train_features, static_cast<std::size_t>(cfg.hp.input_dim));
  const Matrix x = feature_rows(ds, table);

  const auto plan = drrnn::make_splits(y, cfg.seeds, cfg.k);
  const drrnn::EnsembleConfig ec{cfg.seeds, cfg.k, cfg.seed, cfg.jobs};
  const auto models = drrnn::train_ensemble(x, y, cfg.hp, ec, &plan);

  fs::create_directories(out / "checkpoints");
  ordered_json manifest;
  manifest["format"] = "drrnn-ensemble-manifest";
  manifest["version"] = 1;
  manifest["checkpoints"] = ordered_json::array();
  std::string log = "seed_index\tfold_index\tbest_epoch\tbest_val_acc\n";
  for (std::size_t i = 0; i < models.size(); ++i) {
    const auto& m = models[i];
    const auto rel = fs::path("checkpoints") / (split_name(m.split) + ".ckpt");
    drrnn::save_checkpoint(m, out / rel);
    std::vector<std::string> val_ids;
    for (auto r : plan.pairs[i].val) val_ids.push_back(ds.questions[r].id);
    manifest["checkpoints"].push_back({{"path", rel.generic_string()},
                                       {"seed_index", m.split.seed_index},
                                       {"fold_index", m.split.fold_index},
                                       {"best_val_acc", m.best_val_acc},
                                       {"best_epoch", m.best_epoch},
                                       {"val_ids", val_ids}});
    char line[96];
    std::snprintf(line, sizeof line, "%d\t%d\t%d\t%.17g\n", m.split.seed_index, m.split.fold_index, m.best_epoch,
                  m.best_val_acc);
    log += line;
  }
  write_file(out / "manifest.json", manifest.dump(2) + "\n");
  write_file(out / "train_log.tsv", log);
}

void cmd_predict(const fs::path& manifest_path, const fs::path& features_path, const fs::path& out_dir, bool oof) {
  const auto entries = load_manifest(manifest_path);
  std::vector<drrnn::ModelCheckpoint> models;
  for (const auto& e : entries) models.push_back(drrnn::load_checkpoint(e.checkpoint));
  const auto table = features::load_embedding_table(features_path, static_cast<std::size_t>(models.front().hp.input_dim));
  const Matrix x = table_rows(table);

  Matrix summed = Matrix::Zero(x.rows(), static_cast<Eigen::Index>(kNumClasses));
  std::vector<int> votes(table.size(), static_cast<int>(models.size()));
  if (!oof) {
    summed = drrnn::ensemble_summed_probs(models, x);
  } else {
    std::unordered_map<std::string, std::size_t> row_of;
    for (std::size_t i = 0; i < table.size(); ++i) row_of.emplace(table.ids()[i], i);
    std::fill(votes.begin(), votes.end(), 0);
    for (std::size_t k = 0; k < models.size(); ++k) {
      std::vector<std::size_t> rows;
      for (const auto& id : entries[k].val_ids)
        if (auto it = row_of.find(id); it != row_of.end()) rows.push_back(it->second);
      if (rows.empty()) continue;
      const Matrix p = nn::softmax(drrnn::forward(models[k], drrnn::gather_rows(x, rows), false, nullptr));
      for (std::size_t j = 0; j < rows.size(); ++j) {
        summed.row(static_cast<Eigen::Index>(rows[j])) += p.row(static_cast<Eigen::Index>(j));
        ++votes[rows[j]];
      }
    }
    for (std::size_t i = 0; i < votes.size(); ++i)
      if (votes[i] == 0) throw DataError("id '" + table.ids()[i] + "' is not held out by any checkpoint");
  }

  ensemble::ProbMatrix probs;
  probs.system_name = oof ? "drrnn-oof" : "drrnn";
  LabelFile labels;
  for (Eigen::Index i = 0; i < summed.rows(); ++i) {
    auto p = row_probs(summed, i);
    const Label label = label_from_index(nn::argmax(p));
    const double total = p[0] + p[1] + p[2];
    for (auto& v : p) v /= total;
    probs.add(table.ids()[static_cast<std::size_t>(i)], p);
    labels.emplace_back(table.ids()[static_cast<std::size_t>(i)], label);
  }
  fs::create_directories(out_dir);
  ensemble::save_prob_matrix(probs, out_dir / "probs.tsv");
  save_label_file(labels, out_dir / "labels.tsv");
}

eval::MetricsReport cmd_evaluate(const fs::path& gold_path, const fs::path& labels_path, const fs::path& out_dir) {
  const auto gold = load_questions(gold_path);
  std::unordered_map<std::string, Label> predicted;
  for (const auto& [id, l] : load_label_file(labels_path)) predicted.emplace(id, l);
  std::vector<Label> g, p;
  std::vector<std::string> categories;
  for (const auto& q : gold.questions) {
    if (!q.label) continue;
    auto it = predicted.find(q.id);
    if (it == predicted.end()) throw DataError("no prediction for gold id '" + q.id + "'");
    g.push_back(*q.label);
    p.push_back(it->second);
    categories.push_back(q.category);
  }
  const auto report = eval::evaluate(g, p, categories);
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_file(out_dir / "report.txt", eval::format_report(report));
    write_file(out_dir / "metrics.json", eval::report_to_json(report));
  }
  return report;
}

void cmd_hpo(const RunConfig& cfg, int budget) {
  require(cfg.train, "train");
  require(cfg.train_features, "train_features");
  const fs::path out = cfg.output_dir;
  write_config(cfg, out);
  const auto ds = load_questions(cfg.train);
  const auto y = ds.labels();
  const auto table = features::load_embedding_table(cfg.train_features, static_cast<std::size_t>(cfg.hp.input_dim));
  const auto result = drrnn::random_search(cfg.search, budget, feature_rows(ds, table), y, cfg.hp, cfg.k, cfg.seed, cfg.jobs);

  std::string log = "trial\tcv_accuracy\tbase_lr\tl2_lambda\tinput_dropout\tblock_dropout\tn_blocks\tblock_dim\n";
  for (std::size_t t = 0; t < result.trials.size(); ++t) {
    const auto& tr = result.trials[t];
    char line[256];
    std::snprintf(line, sizeof line, "%zu\t%.17g\t%.17g\t%.17g\t%.17g\t%.17g\t%d\t%d\n", t, tr.cv_accuracy, tr.hp.base_lr,
                  tr.hp.l2_lambda, tr.hp.input_dropout, tr.hp.block_dropout, tr.hp.n_blocks, tr.hp.block_dim);
    log += line;
  }
  write_file(out / "hpo_trials.tsv", log);
  RunConfig best = cfg;
  best.hp = result.best_hp;
  write_file(out / "best_config.json", to_json(best).dump(2) + "\n");
}

BaselineKind parse_baseline_kind(const std::string& s) {
  if (s == "tfidf-svm") return BaselineKind::TfidfSvm;
  if (s == "logreg") return BaselineKind::LogReg;
  if (s == "forest") return BaselineKind::Forest;
  throw ConfigError("unknown baseline '" + s + "' (expected tfidf-svm, logreg or forest)");
}

void cmd_baseline(BaselineKind kind, const RunConfig& cfg, bool oof) {
  require(cfg.train, "train");
  const fs::path out = cfg.output_dir;
  write_config(cfg, out);
  const auto& b = cfg.baselines;
  const auto train = load_questions(cfg.train);
  const auto y = train.labels();
  const auto ids = train.ids();
  std::optional<Dataset> test;
  if (!cfg.test.empty()) test = load_questions(cfg.test);

  const char* system = kind == BaselineKind::TfidfSvm ? "tfidf-svm" : kind == BaselineKind::LogReg ? "logreg" : "forest";
  const baselines::SvmOptions svm_opt{b.svm_lambda, b.svm_epochs, cfg.seed};
  const baselines::LogRegOptions lr_opt{b.logreg_l2, b.logreg_epochs};
  const baselines::ForestOptions rf_opt{b.forest_trees, true, 0, cfg.seed, cfg.jobs};

  // Each kind provides: fit on training rows, then probabilities for other rows.
  using Rows = std::span<const std::size_t>;
  ensemble::ProbTrainer trainer;
  std::function<Container()> fit_full;
  std::function<std::vector<ensemble::Probs>()> predict_test;

  std::vector<std::string> texts;
  Matrix x, x_test;
  std::vector<baselines::SparseVector> xs;
  if (kind == BaselineKind::TfidfSvm) {
    const auto rules = cfg.preprocess.resolve();
    for (const auto& q : train.questions) texts.push_back(question_text(q, cfg.preprocess, rules));
    auto fit = [&, rules](Rows rows) {
      std::vector<std::string> corpus;
      for (auto r : rows) corpus.push_back(texts[r]);
      auto tfidf = baselines::tfidf_fit(corpus, b.ngram_min, b.ngram_max);
      std::vector<baselines::SparseVector> xs;
      std::vector<Label> ys;
      for (auto r : rows) {
        xs.push_back(baselines::tfidf_transform(tfidf, texts[r]));
        ys.push_back(y[r]);
      }
      return std::make_pair(std::move(tfidf), baselines::svm_train(xs, ys, svm_opt));
    };
    trainer = [&, fit](Rows tr, Rows pr) {
      const auto [tfidf, svm] = fit(tr);
      std::vector<ensemble::Probs> out_rows;
      for (auto r : pr) out_rows.push_back(svm.predict_proba(baselines::tfidf_transform(tfidf, texts[r])));
      return out_rows;
    };
    std::vector<std::size_t> all(train.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    auto full = std::make_shared<std::pair<baselines::TfidfModel, baselines::LinearModel>>(fit(all));
    fit_full = [full] {
      auto c = baselines::to_container(full->second);
      baselines::add_tfidf(c, full->first);
      c.kind = "tfidf-svm";
      return c;
    };
    predict_test = [&, full, rules] {
      std::vector<ensemble::Probs> rows;
      for (const auto& q : test->questions)
        rows.push_back(full->second.predict_proba(baselines::tfidf_transform(full->first, question_text(q, cfg.preprocess, rules))));
      return rows;
    };
  } else {
    require(cfg.train_features, "train_features");
    x = feature_rows(train, features::load_embedding_table_any(cfg.train_features));
    if (test) {
      require(cfg.test_features, "test_features");
      x_test = feature_rows(*test, features::load_embedding_table_any(cfg.test_features));
      if (x_test.cols() != x.cols()) throw DataError("train and test feature tables differ in width");
    }
    xs = baselines::to_sparse(x);
    if (kind == BaselineKind::LogReg) {
      auto fit = [&](Rows rows) {
        std::vector<baselines::SparseVector> sub;
        std::vector<Label> ys;
        for (auto r : rows) {
          sub.push_back(xs[r]);
          ys.push_back(y[r]);
        }
        return baselines::logreg_train(sub, ys, lr_opt);
      };
      trainer = [&, fit](Rows tr, Rows pr) {
        const auto m = fit(tr);
        std::vector<ensemble::Probs> rows;
        for (auto r : pr) rows.push_back(m.predict_proba(xs[r]));
        return rows;
      };
      std::vector<std::size_t> all(train.size());
      std::iota(all.begin(), all.end(), std::size_t{0});
      auto full = std::make_shared<baselines::LinearModel>(fit(all));
      fit_full = [full] { return baselines::to_container(*full); };
      predict_test = [&, full] {
        std::vector<ensemble::Probs> rows;
        for (const auto& row : baselines::to_sparse(x_test)) rows.push_back(full->predict_proba(row));
        return rows;
      };
    } else {
      auto fit = [&](Rows rows) {
        return baselines::rf_train(drrnn::gather_rows(x, rows), drrnn::gather(std::span<const Label>(y), rows), rf_opt);
      };
      trainer = [&, fit](Rows tr, Rows pr) {
        const auto f = fit(tr);
        std::vector<ensemble::Probs> rows;
        for (auto r : pr) rows.push_back(f.predict_proba({x.row(static_cast<Eigen::Index>(r)).data(), static_cast<std::size_t>(x.cols())}));
        return rows;
      };
      std::vector<std::size_t> all(train.size());
      std::iota(all.begin(), all.end(), std::size_t{0});
      auto full = std::make_shared<baselines::Forest>(fit(all));
      fit_full = [full] { return baselines::to_container(*full); };
      predict_test = [&, full] {
        std::vector<ensemble::Probs> rows;
        for (Eigen::Index i = 0; i < x_test.rows(); ++i)
          rows.push_back(full->predict_proba({x_test.row(i).data(), static_cast<std::size_t>(x_test.cols())}));
        return rows;
      };
    }
  }

  save_container(fit_full(), out / "model.bin");
  if (test) {
    const auto rows = predict_test();
    ensemble::ProbMatrix probs;
    probs.system_name = system;
    LabelFile labels;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      probs.add(test->questions[i].id, rows[i]);
      labels.emplace_back(test->questions[i].id, label_from_index(nn::argmax(rows[i])));
    }
    ensemble::save_prob_matrix(probs, out / "probs_test.tsv");
    save_label_file(labels, out / "labels_test.tsv");
  }
  if (oof) {
    const auto m = ensemble::oof_probs(trainer, ids, y, cfg.k, cfg.seed, std::string(system) + "-oof");
    ensemble::save_prob_matrix(m, out / "probs_oof.tsv");
  }
}

void cmd_stack(const StackArgs& args) {
  if (args.train_probs.empty()) throw ConfigError("stack needs at least one training probability matrix");
  std::vector<ensemble::ProbMatrix> train_bases;
  for (const auto& p : args.train_probs) train_bases.push_back(ensemble::load_prob_matrix(p));
  const auto gold = load_questions(args.labels);
  std::vector<std::string> ids;
  std::vector<Label> y;
  for (const auto& q : gold.questions) {
    if (!q.label) continue;
    ids.push_back(q.id);
    y.push_back(*q.label);
  }

  std::vector<ensemble::ProbMatrix> predict_bases;
  if (args.predict_probs.empty()) {
    predict_bases = train_bases;
  } else {
    for (const auto& p : args.predict_probs) predict_bases.push_back(ensemble::load_prob_matrix(p));
  }
  const auto predict_ids = predict_bases.front().ids();

  std::vector<Label> pred;
  if (args.kind == StackKind::C1) {
    auto svm = baselines::SvmOptions{1e-4, 200, args.seed};
    pred = ensemble::stack_train_c1(train_bases, ids, y, svm).predict(predict_bases, predict_ids);
  } else {
    ensemble::C2Options opt;
    opt.seed = args.seed;
    opt.jobs = args.jobs;
    pred = ensemble::stack_train_c2(train_bases, ids, y, opt).predict(predict_bases, predict_ids);
  }

  fs::create_directories(args.output_dir);
  ordered_json cfg;
  cfg["kind"] = args.kind == StackKind::C1 ? "c1" : "c2";
  cfg["labels"] = args.labels.string();
  cfg["train_probs"] = ordered_json::array();
  for (const auto& p : args.train_probs) cfg["train_probs"].push_back(p.string());
  cfg["predict_probs"] = ordered_json::array();
  for (const auto& p : args.predict_probs) cfg["predict_probs"].push_back(p.string());
  cfg["seed"] = args.seed;
  cfg["jobs"] = args.jobs;
  write_file(args.output_dir / "config.json", cfg.dump(2) + "\n");

  LabelFile labels;
  for (std::size_t i = 0; i < predict_ids.size(); ++i) labels.emplace_back(predict_ids[i], pred[i]);
  save_label_file(labels, args.output_dir / "labels.tsv");
}

}  // namespace drr::cli
