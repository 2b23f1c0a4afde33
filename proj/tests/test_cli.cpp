#include <doctest.h>

#include <json.hpp>

#include "drr/cli.hpp"
#include "drr/ensemble.hpp"
#include "drr/error.hpp"
#include "drr/features.hpp"
#include "drr/synthetic.hpp"
#include "drr/textio.hpp"
#include "helpers.hpp"

using namespace drr;
using namespace drr::cli;

namespace {

// Writes a small blob corpus and its feature tables into `dir`.
RunConfig small_run(const test::TempDir& dir) {
  synthetic::BlobOptions opt;
  opt.n_train = 45;
  opt.n_test = 15;
  opt.seed = 2;
  const auto corpus = synthetic::make_blob_corpus(opt);
  save_questions(corpus.train, dir / "train.jsonl");
  save_questions(corpus.test, dir / "test.jsonl");
  features::save_embedding_table(corpus.embeddings, dir / "emb.tsv");
  features::save_wordvecs(corpus.wordvecs, dir / "wv.vec");

  RunConfig cfg;
  cfg.train = (dir / "train.jsonl").string();
  cfg.test = (dir / "test.jsonl").string();
  cfg.embeddings = (dir / "emb.tsv").string();
  cfg.wordvecs = (dir / "wv.vec").string();
  cfg.output_dir = (dir / "feat").string();
  cmd_featurize(cfg);
  cfg.train_features = (dir / "feat" / "features_train.tsv").string();
  cfg.test_features = (dir / "feat" / "features_test.tsv").string();
  cfg.hp.block_dim = 8;
  cfg.hp.n_blocks = 2;
  cfg.hp.max_epochs = 15;
  cfg.seeds = {1, 2};
  cfg.k = 3;
  return cfg;
}

}  // namespace

TEST_CASE("config serialization and overlay") {
  RunConfig c;
  c.train = "t.jsonl";
  c.hp.block_dim = 40;
  c.seeds = {9, 8};
  c.preprocess.rules.replace_urls = true;
  c.search.n_blocks = {3, 5};
  c.baselines.forest_trees = 17;
  const auto back = from_json(nlohmann::json::parse(to_json(c).dump()));
  CHECK(to_json(back) == to_json(c));

  const auto partial = from_json(nlohmann::json::parse(R"({"seed": 5, "hp": {"max_epochs": 3}})"), c);
  CHECK(partial.seed == 5);
  CHECK(partial.hp.max_epochs == 3);
  CHECK(partial.hp.block_dim == 40);
  CHECK(partial.train == "t.jsonl");

  CHECK_THROWS_AS(from_json(nlohmann::json::parse(R"({"sed": 5})")), ConfigError);
  CHECK_THROWS_AS(from_json(nlohmann::json::parse(R"({"hp": {"lr": 1}})")), ConfigError);
  CHECK_THROWS_AS(from_json(nlohmann::json::parse(R"({"k": "five"})")), ConfigError);

  test::TempDir dir("cfg");
  write_config(c, dir.path());
  CHECK(to_json(load_config(dir / "config.json")) == to_json(c));
  write_file(dir / "bad.json", "{nope");
  CHECK_THROWS_AS(load_config(dir / "bad.json"), ConfigError);
  CHECK_THROWS_AS(load_config(dir / "missing.json"), ConfigError);
}

TEST_CASE("featurize writes 815-dim tables and the config") {
  test::TempDir dir("feat");
  const auto cfg = small_run(dir);
  const auto t = features::load_embedding_table(cfg.train_features, 815);
  CHECK(t.size() == 45);
  CHECK(features::load_embedding_table(cfg.test_features, 815).size() == 15);
  CHECK(std::filesystem::exists(dir / "feat" / "category_stats.json"));
  CHECK(std::filesystem::exists(dir / "feat" / "config.json"));
}

TEST_CASE("train then predict reproduces the recorded split accuracies") {
  test::TempDir dir("train");
  auto cfg = small_run(dir);
  cfg.output_dir = (dir / "run").string();
  cmd_train(cfg);
  CHECK(std::filesystem::exists(dir / "run" / "config.json"));
  CHECK(std::filesystem::exists(dir / "run" / "train_log.tsv"));
  const auto entries = load_manifest(dir / "run" / "manifest.json");
  REQUIRE(entries.size() == 6);

  const auto train = load_questions(cfg.train);
  const auto table = features::load_embedding_table(cfg.train_features, 815);
  for (const auto& e : entries) {
    const auto m = drrnn::load_checkpoint(e.checkpoint);
    CHECK(m.split == e.split);
    // Score the held-out ids through the predict command, one model at a time.
    features::EmbeddingTable val(815);
    for (const auto& id : e.val_ids) val.add(id, table.row(id));
    features::save_embedding_table(val, dir / "val.tsv");
    nlohmann::json single = nlohmann::json::parse(read_file(dir / "run" / "manifest.json"));
    nlohmann::json keep = nlohmann::json::array();
    for (const auto& c : single["checkpoints"])
      if (c["seed_index"] == e.split.seed_index && c["fold_index"] == e.split.fold_index) keep.push_back(c);
    single["checkpoints"] = keep;
    write_file(dir / "run" / "single.json", single.dump());
    cmd_predict(dir / "run" / "single.json", dir / "val.tsv", dir / "p");
    int ok = 0;
    const auto labels = load_label_file(dir / "p" / "labels.tsv");
    for (const auto& [id, l] : labels)
      for (const auto& q : train.questions)
        if (q.id == id) ok += q.label == l;
    CHECK(static_cast<double>(ok) / static_cast<double>(labels.size()) == e.best_val_acc);
  }

  cmd_predict(dir / "run" / "manifest.json", cfg.test_features, dir / "pred");
  const auto probs = ensemble::load_prob_matrix(dir / "pred" / "probs.tsv");
  CHECK(probs.size() == 15);
  CHECK(load_label_file(dir / "pred" / "labels.tsv").size() == 15);

  cmd_predict(dir / "run" / "manifest.json", cfg.train_features, dir / "oof", true);
  CHECK(ensemble::load_prob_matrix(dir / "oof" / "probs.tsv").size() == 45);
}

TEST_CASE("evaluate against identical labels gives perfect scores") {
  test::TempDir dir("evaluate");
  const auto cfg = small_run(dir);
  const auto test = load_questions(cfg.test);
  LabelFile labels;
  for (const auto& q : test.questions) labels.emplace_back(q.id, *q.label);
  save_label_file(labels, dir / "gold.tsv");
  const auto r = cmd_evaluate(cfg.test, dir / "gold.tsv", dir / "eval");
  CHECK(r.accuracy == 1.0);
  CHECK(r.macro_f1 == 1.0);
  CHECK(r.avg_rec == 1.0);
  CHECK(std::filesystem::exists(dir / "eval" / "report.txt"));
  CHECK(std::filesystem::exists(dir / "eval" / "metrics.json"));

  labels.pop_back();
  save_label_file(labels, dir / "short.tsv");
  CHECK_THROWS_AS(cmd_evaluate(cfg.test, dir / "short.tsv", ""), DataError);
}

TEST_CASE("stack c1 with a single perfect matrix recovers gold") {
  test::TempDir dir("stack");
  const auto cfg = small_run(dir);
  const auto train = load_questions(cfg.train);
  ensemble::ProbMatrix m;
  m.system_name = "perfect";
  for (const auto& q : train.questions) {
    baselines::Probs p{};
    p[static_cast<std::size_t>(index_of(*q.label))] = 1.0;
    m.add(q.id, p);
  }
  ensemble::save_prob_matrix(m, dir / "perfect.tsv");
  StackArgs args;
  args.train_probs = {dir / "perfect.tsv"};
  args.labels = cfg.train;
  args.output_dir = dir / "c1";
  cmd_stack(args);
  const auto labels = load_label_file(dir / "c1" / "labels.tsv");
  REQUIRE(labels.size() == train.size());
  for (std::size_t i = 0; i < labels.size(); ++i) CHECK(labels[i].second == *train.questions[i].label);
  CHECK(std::filesystem::exists(dir / "c1" / "config.json"));

  args.kind = StackKind::C2;
  args.output_dir = dir / "c2";
  cmd_stack(args);
  CHECK(load_label_file(dir / "c2" / "labels.tsv") == labels);
}

TEST_CASE("baseline commands write models and probabilities") {
  test::TempDir dir("baseline");
  auto cfg = small_run(dir);
  cfg.k = 3;
  cfg.baselines.forest_trees = 5;
  cfg.baselines.logreg_epochs = 50;
  for (const auto& kind : {"tfidf-svm", "logreg", "forest"}) {
    cfg.output_dir = (dir / kind).string();
    cmd_baseline(parse_baseline_kind(kind), cfg, true);
    CHECK(std::filesystem::exists(dir / kind / "model.bin"));
    CHECK(ensemble::load_prob_matrix(dir / kind / "probs_test.tsv").size() == 15);
    CHECK(load_label_file(dir / kind / "labels_test.tsv").size() == 15);
    CHECK(ensemble::load_prob_matrix(dir / kind / "probs_oof.tsv").size() == 45);
  }
  CHECK_THROWS_AS(parse_baseline_kind("rbf"), ConfigError);
}

TEST_CASE("preprocess command") {
  test::TempDir dir("pre");
  Dataset ds;
  ds.questions.push_back({"a", "PAID 500 QAR", "see http://x.y 1st", "c", Label::Factual});
  save_questions(ds, dir / "in.jsonl");
  PreprocessSettings s;
  s.rules = preprocess::RuleConfig::all_enabled();
  s.jargon = true;
  cmd_preprocess(dir / "in.jsonl", dir / "out.jsonl", s);
  const auto out = load_questions(dir / "out.jsonl");
  CHECK(out.questions[0].subject == "paid num Qatar currency");
  CHECK(out.questions[0].body == "see url link nth");
  CHECK(out.questions[0].label == Label::Factual);
}

TEST_CASE("missing inputs are data errors") {
  RunConfig cfg;
  cfg.train = "/nonexistent/train.jsonl";
  cfg.train_features = "/nonexistent/f.tsv";
  test::TempDir dir("missing");
  cfg.output_dir = dir.path().string();
  CHECK_THROWS_AS(cmd_train(cfg), DataError);
  RunConfig empty;
  empty.output_dir = dir.path().string();
  CHECK_THROWS_AS(cmd_train(empty), ConfigError);
}
