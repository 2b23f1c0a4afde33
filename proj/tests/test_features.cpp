#include <doctest.h>

#include <cmath>
#include <set>

#include "drr/error.hpp"
#include "drr/features.hpp"
#include "drr/textio.hpp"
#include "helpers.hpp"

using namespace drr;
using namespace drr::features;

namespace {

std::string table_text(std::size_t dim, const std::vector<std::pair<std::string, std::vector<double>>>& rows) {
  std::string s = "#dim=" + std::to_string(dim) + "\n";
  for (const auto& [id, v] : rows) {
    s += id + "\t";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + format_float(v[i]);
    s += "\n";
  }
  return s;
}

std::string what(auto&& fn) {
  try {
    fn();
  } catch (const DataError& e) {
    return e.what();
  }
  return "no error";
}

}  // namespace

TEST_CASE("embedding tables parse, validate and round trip") {
  const std::vector<double> v(512, 0.5);
  const auto t = parse_embedding_table(table_text(512, {{"a", v}, {"b", v}, {"c", v}}), 512);
  CHECK(t.size() == 3);
  CHECK(t.ids() == std::vector<std::string>{"a", "b", "c"});
  CHECK(t.row("b")[511] == 0.5);

  const std::vector<double> short_row(511, 0.5);
  CHECK(what([&] { parse_embedding_table(table_text(512, {{"a", v}, {"bad", short_row}}), 512); }).find("bad") !=
        std::string::npos);
  CHECK(parse_embedding_table("#dim=512\n", 512).size() == 0);
  CHECK(what([&] { parse_embedding_table("#dim=300\n", 512); }) != "no error");
  CHECK(what([&] { parse_embedding_table("a\t1 2\n", 2); }) != "no error");
  CHECK(what([&] { parse_embedding_table("#dim=2\na\t1 2\na\t3 4\n", 2); }).find("a") != std::string::npos);
  CHECK(what([&] { parse_embedding_table("#dim=2\na\t1 x\n", 2); }) != "no error");
  CHECK(what([&] { t.row("zzz"); }).find("zzz") != std::string::npos);

  test::TempDir dir("emb");
  save_embedding_table(t, dir / "t.tsv");
  const auto back = load_embedding_table(dir / "t.tsv", 512);
  CHECK(format_embedding_table(back) == format_embedding_table(t));
  CHECK(load_embedding_table_any(dir / "t.tsv").dim() == 512);
}

TEST_CASE("random embedding tables are unit norm, keyed and reproducible") {
  std::vector<std::string> ids;
  for (int i = 0; i < 10000; ++i) ids.push_back("q" + std::to_string(i));
  const auto a = random_embedding_table(ids, 16, 3);
  const auto b = random_embedding_table(ids, 16, 3);
  CHECK(format_embedding_table(a) == format_embedding_table(b));
  std::set<std::vector<double>> distinct;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto r = a.row_at(i);
    double n = 0;
    for (double x : r) n += x * x;
    CHECK(std::sqrt(n) == doctest::Approx(1.0).epsilon(1e-6));
    distinct.emplace(r.begin(), r.end());
  }
  CHECK(distinct.size() == ids.size());
  // A row depends only on (seed, id), not on the other ids.
  const std::vector<std::string> one = {"q42"};
  const auto c = random_embedding_table(one, 16, 3);
  CHECK(std::equal(c.row_at(0).begin(), c.row_at(0).end(), a.row("q42").begin()));
  CHECK(random_embedding_table(one, 16, 4).row_at(0)[0] != c.row_at(0)[0]);
}

TEST_CASE("word vector files") {
  const auto t = parse_wordvecs("2 3\na 1 0 0\nb 0 1 0\n");
  CHECK(t.dim() == 3);
  REQUIRE(t.find("a") != nullptr);
  CHECK(std::vector<double>(t.find("b"), t.find("b") + 3) == std::vector<double>{0, 1, 0});
  CHECK(t.find("c") == nullptr);
  CHECK(what([] { parse_wordvecs("3 3\na 1 0 0\nb 0 1 0\n"); }) != "no error");
  CHECK(what([] { parse_wordvecs("2 3\na 1 0 0\na 0 1 0\n"); }).find("'a'") != std::string::npos);
  CHECK(what([] { parse_wordvecs("1 3\na 1 0 q\n"); }).find("line 2") != std::string::npos);
  CHECK(what([] { parse_wordvecs("1 3\na 1 0\n"); }) != "no error");
  CHECK(parse_wordvecs(format_wordvecs(t)).tokens() == t.tokens());
}

TEST_CASE("tokenize peels punctuation") {
  CHECK(tokenize("How long?") == std::vector<std::string>{"How", "long", "?"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("e.g. Doha!") == std::vector<std::string>{"e.g", ".", "Doha", "!"});
  CHECK(tokenize("  (hi)  ") == std::vector<std::string>{"(", "hi", ")"});
  CHECK(tokenize("...") == std::vector<std::string>{".", ".", "."});
}

TEST_CASE("averaged word vectors") {
  const auto t = parse_wordvecs("2 3\na 1 0 0\nb 0 1 0\n");
  const std::vector<std::string> ab = {"a", "b"}, oov = {"x", "y"}, one = {"a"}, mixed = {"A", "zz", "b"};
  CHECK(avg_wordvecs(ab, t) == std::vector<double>{0.5, 0.5, 0});
  CHECK(avg_wordvecs(oov, t) == std::vector<double>{0, 0, 0});
  CHECK(avg_wordvecs(one, t) == std::vector<double>{1, 0, 0});
  CHECK(avg_wordvecs(mixed, t) == std::vector<double>{0.5, 0.5, 0});
  CHECK(avg_wordvecs({}, t) == std::vector<double>{0, 0, 0});
}

namespace {

Dataset labelled(const std::vector<std::pair<std::string, Label>>& rows) {
  Dataset ds;
  int i = 0;
  for (const auto& [cat, l] : rows) ds.questions.push_back({"q" + std::to_string(i++), "s", "b", cat, l});
  return ds;
}

}  // namespace

TEST_CASE("category statistics") {
  using L = Label;
  const auto ds = labelled({{"A", L::Factual}, {"A", L::Factual}, {"A", L::Opinion}, {"A", L::Socializing},
                            {"B", L::Opinion}});
  const auto cs = fit_category_stats(ds);
  CHECK(cs.lookup("A") == std::array<double, 3>{0.5, 0.25, 0.25});
  CHECK(cs.lookup("B") == std::array<double, 3>{0, 1, 0});
  CHECK(cs.lookup("unseen") == std::array<double, 3>{0.4, 0.4, 0.2});

  const auto sym = fit_category_stats(labelled({{"x", L::Factual}, {"y", L::Opinion}, {"z", L::Socializing}}));
  for (double g : sym.global) CHECK(g == doctest::Approx(1.0 / 3));

  const auto back = category_stats_from_json(category_stats_to_json(cs));
  CHECK(back.per_category == cs.per_category);
  CHECK(back.global == cs.global);
}

TEST_CASE("assemble lays out 512 + 300 + 3") {
  Dataset train = labelled({{"A", Label::Factual}, {"A", Label::Opinion}});
  train.questions[0].subject = "visa";
  train.questions[0].body = "price?";
  const auto ids = train.ids();
  const auto emb = random_embedding_table(ids, kSentenceDim, 1);
  WordVecTable wv(kWordDim);
  std::vector<double> visa(kWordDim, 0.0), price(kWordDim, 0.0);
  visa[0] = 1;
  price[1] = 1;
  wv.add("visa", visa);
  wv.add("price", price);
  const auto cs = fit_category_stats(train);

  const auto f = assemble(train.questions[0], emb, wv, cs);
  REQUIRE(f.size() == kFeatureDim);
  CHECK(kFeatureDim == 815);
  CHECK(std::equal(f.begin(), f.begin() + 512, emb.row("q0").begin()));
  CHECK(f[512] == 0.5);
  CHECK(f[513] == 0.5);
  CHECK(f[812] == 0.5);
  CHECK(f[813] == 0.5);
  CHECK(f[814] == 0.0);

  Question unseen = train.questions[1];
  unseen.category = "never seen";
  const auto g = assemble(unseen, emb, wv, cs);
  CHECK(std::equal(g.begin() + 812, g.end(), cs.global.begin()));

  Question missing = unseen;
  missing.id = "nope";
  CHECK(what([&] { assemble(missing, emb, wv, cs); }).find("nope") != std::string::npos);

  const auto table = featurize(train, emb, wv, cs);
  CHECK(table.dim() == 815);
  CHECK(table.ids() == ids);
}
