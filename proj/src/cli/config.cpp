#include <fstream>

#include "drr/cli.hpp"
#include "drr/error.hpp"
#include "drr/textio.hpp"

namespace drr::cli {

using nlohmann::json;
using nlohmann::ordered_json;

preprocess::RuleConfig PreprocessSettings::resolve() const {
  auto r = rules;
  r.jargon_dict.clear();
  if (jargon) r.jargon_dict = jargon_path.empty() ? preprocess::builtin_jargon() : preprocess::load_jargon(jargon_path);
  return r;
}

bool PreprocessSettings::any() const {
  return rules.strip_emoji || rules.replace_urls || rules.replace_datetimes || rules.replace_ordinals ||
         rules.replace_numbers || rules.lowercase_if_shouty || jargon;
}

ordered_json to_json(const RunConfig& c) {
  ordered_json j;
  j["train"] = c.train;
  j["dev"] = c.dev;
  j["test"] = c.test;
  j["embeddings"] = c.embeddings;
  j["wordvecs"] = c.wordvecs;
  j["train_features"] = c.train_features;
  j["test_features"] = c.test_features;
  j["output_dir"] = c.output_dir;
  const auto& hp = c.hp;
  j["hp"] = {{"input_dim", hp.input_dim},         {"block_dim", hp.block_dim},
             {"n_blocks", hp.n_blocks},           {"input_dropout", hp.input_dropout},
             {"block_dropout", hp.block_dropout}, {"base_lr", hp.base_lr},
             {"warmup_epochs", hp.warmup_epochs}, {"l2_lambda", hp.l2_lambda},
             {"max_epochs", hp.max_epochs},       {"n_classes", hp.n_classes}};
  j["seeds"] = c.seeds;
  j["k"] = c.k;
  j["seed"] = c.seed;
  j["jobs"] = c.jobs;
  const auto& p = c.preprocess;
  j["preprocess"] = {{"strip_emoji", p.rules.strip_emoji},
                     {"replace_urls", p.rules.replace_urls},
                     {"replace_datetimes", p.rules.replace_datetimes},
                     {"replace_ordinals", p.rules.replace_ordinals},
                     {"replace_numbers", p.rules.replace_numbers},
                     {"lowercase_if_shouty", p.rules.lowercase_if_shouty},
                     {"jargon", p.jargon},
                     {"jargon_path", p.jargon_path}};
  const auto& s = c.search;
  j["search"] = {{"base_lr", {s.base_lr.lo, s.base_lr.hi}},
                 {"l2_lambda", {s.l2_lambda.lo, s.l2_lambda.hi}},
                 {"input_dropout", {s.input_dropout.lo, s.input_dropout.hi}},
                 {"block_dropout", {s.block_dropout.lo, s.block_dropout.hi}},
                 {"n_blocks", {s.n_blocks.lo, s.n_blocks.hi}},
                 {"block_dim", {s.block_dim.lo, s.block_dim.hi}}};
  const auto& b = c.baselines;
  j["baselines"] = {{"ngram_min", b.ngram_min},   {"ngram_max", b.ngram_max},
                    {"svm_lambda", b.svm_lambda}, {"svm_epochs", b.svm_epochs},
                    {"logreg_l2", b.logreg_l2},   {"logreg_epochs", b.logreg_epochs},
                    {"forest_trees", b.forest_trees}};
  return j;
}

namespace {

template <typename T>
void read(const json& obj, const std::string& key, T& out) {
  try {
    out = obj.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

template <typename T>
void read_range(const json& obj, const std::string& key, T& lo, T& hi) {
  if (!obj.is_array() || obj.size() != 2) throw ConfigError("config key '" + key + "' must be [lo, hi]");
  read(obj[0], key, lo);
  read(obj[1], key, hi);
}

[[noreturn]] void unknown(const std::string& key) { throw ConfigError("unknown config key '" + key + "'"); }

void expect_object(const json& j, const std::string& key) {
  if (!j.is_object()) throw ConfigError("config key '" + key + "' must be an object");
}

}  // namespace

RunConfig from_json(const json& j, RunConfig c) {
  expect_object(j, "<root>");
  for (const auto& [key, v] : j.items()) {
    if (key == "train") read(v, key, c.train);
    else if (key == "dev") read(v, key, c.dev);
    else if (key == "test") read(v, key, c.test);
    else if (key == "embeddings") read(v, key, c.embeddings);
    else if (key == "wordvecs") read(v, key, c.wordvecs);
    else if (key == "train_features") read(v, key, c.train_features);
    else if (key == "test_features") read(v, key, c.test_features);
    else if (key == "output_dir") read(v, key, c.output_dir);
    else if (key == "seeds") read(v, key, c.seeds);
    else if (key == "k") read(v, key, c.k);
    else if (key == "seed") read(v, key, c.seed);
    else if (key == "jobs") read(v, key, c.jobs);
    else if (key == "hp") {
      expect_object(v, key);
      auto& hp = c.hp;
      for (const auto& [k2, v2] : v.items()) {
        const auto name = "hp." + k2;
        if (k2 == "input_dim") read(v2, name, hp.input_dim);
        else if (k2 == "block_dim") read(v2, name, hp.block_dim);
        else if (k2 == "n_blocks") read(v2, name, hp.n_blocks);
        else if (k2 == "input_dropout") read(v2, name, hp.input_dropout);
        else if (k2 == "block_dropout") read(v2, name, hp.block_dropout);
        else if (k2 == "base_lr") read(v2, name, hp.base_lr);
        else if (k2 == "warmup_epochs") read(v2, name, hp.warmup_epochs);
        else if (k2 == "l2_lambda") read(v2, name, hp.l2_lambda);
        else if (k2 == "max_epochs") read(v2, name, hp.max_epochs);
        else if (k2 == "n_classes") read(v2, name, hp.n_classes);
        else unknown(name);
      }
    } else if (key == "preprocess") {
      expect_object(v, key);
      auto& p = c.preprocess;
      for (const auto& [k2, v2] : v.items()) {
        const auto name = "preprocess." + k2;
        if (k2 == "strip_emoji") read(v2, name, p.rules.strip_emoji);
        else if (k2 == "replace_urls") read(v2, name, p.rules.replace_urls);
        else if (k2 == "replace_datetimes") read(v2, name, p.rules.replace_datetimes);
        else if (k2 == "replace_ordinals") read(v2, name, p.rules.replace_ordinals);
        else if (k2 == "replace_numbers") read(v2, name, p.rules.replace_numbers);
        else if (k2 == "lowercase_if_shouty") read(v2, name, p.rules.lowercase_if_shouty);
        else if (k2 == "jargon") read(v2, name, p.jargon);
        else if (k2 == "jargon_path") read(v2, name, p.jargon_path);
        else unknown(name);
      }
    } else if (key == "search") {
      expect_object(v, key);
      auto& s = c.search;
      for (const auto& [k2, v2] : v.items()) {
        const auto name = "search." + k2;
        if (k2 == "base_lr") read_range(v2, name, s.base_lr.lo, s.base_lr.hi);
        else if (k2 == "l2_lambda") read_range(v2, name, s.l2_lambda.lo, s.l2_lambda.hi);
        else if (k2 == "input_dropout") read_range(v2, name, s.input_dropout.lo, s.input_dropout.hi);
        else if (k2 == "block_dropout") read_range(v2, name, s.block_dropout.lo, s.block_dropout.hi);
        else if (k2 == "n_blocks") read_range(v2, name, s.n_blocks.lo, s.n_blocks.hi);
        else if (k2 == "block_dim") read_range(v2, name, s.block_dim.lo, s.block_dim.hi);
        else unknown(name);
      }
    } else if (key == "baselines") {
      expect_object(v, key);
      auto& b = c.baselines;
      for (const auto& [k2, v2] : v.items()) {
        const auto name = "baselines." + k2;
        if (k2 == "ngram_min") read(v2, name, b.ngram_min);
        else if (k2 == "ngram_max") read(v2, name, b.ngram_max);
        else if (k2 == "svm_lambda") read(v2, name, b.svm_lambda);
        else if (k2 == "svm_epochs") read(v2, name, b.svm_epochs);
        else if (k2 == "logreg_l2") read(v2, name, b.logreg_l2);
        else if (k2 == "logreg_epochs") read(v2, name, b.logreg_epochs);
        else if (k2 == "forest_trees") read(v2, name, b.forest_trees);
        else unknown(name);
      }
    } else {
      unknown(key);
    }
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON");
  } catch (const DataError&) {
    throw ConfigError("cannot read config '" + path.string() + "'");
  }
  return from_json(j);
}

void write_config(const RunConfig& cfg, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir / "config.json", to_json(cfg).dump(2) + "\n");
}

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error&) {
    throw DataError("manifest '" + path.string() + "' is not valid JSON");
  }
  std::vector<ManifestEntry> out;
  try {
    for (const auto& e : j.at("checkpoints")) {
      ManifestEntry m;
      m.checkpoint = e.at("path").get<std::string>();
      if (m.checkpoint.is_relative()) m.checkpoint = path.parent_path() / m.checkpoint;
      m.split = {e.at("seed_index").get<int>(), e.at("fold_index").get<int>()};
      m.best_val_acc = e.at("best_val_acc").get<double>();
      m.best_epoch = e.at("best_epoch").get<int>();
      m.val_ids = e.at("val_ids").get<std::vector<std::string>>();
      out.push_back(std::move(m));
    }
  } catch (const json::exception& e) {
    throw DataError("manifest '" + path.string() + "': " + e.what());
  }
  if (out.empty()) throw DataError("manifest '" + path.string() + "' lists no checkpoints");
  return out;
}

}  // namespace drr::cli
