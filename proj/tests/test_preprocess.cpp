#include <doctest.h>

#include "drr/error.hpp"
#include "drr/preprocess.hpp"
#include "drr/rng.hpp"
#include "helpers.hpp"

using namespace drr;
using namespace drr::preprocess;

namespace {

RuleConfig only(bool RuleConfig::*flag) {
  RuleConfig c;
  c.*flag = true;
  return c;
}

}  // namespace

TEST_CASE("default config is the identity") {
  for (const char* t : {"", "See http://a.b/c now 1st 12:30 😀", "HELLO", "qar"}) CHECK(normalize(t, {}) == t);
}

TEST_CASE("individual rules") {
  CHECK(normalize("See http://a.b/c now", only(&RuleConfig::replace_urls)) == "See url link now");
  CHECK(normalize("go to www.qatarliving.com!", only(&RuleConfig::replace_urls)) == "go to url link");
  CHECK(normalize("I arrived 1st and 5th", only(&RuleConfig::replace_ordinals)) == "I arrived nth and nth");
  CHECK(normalize("on 12/05/2018 at 10:30 pm", only(&RuleConfig::replace_datetimes)) == "on date at hour");
  CHECK(normalize("2019-01-31 or 5.6.19", only(&RuleConfig::replace_datetimes)) == "date or date");
  CHECK(normalize("costs 1,500.50 or 3", only(&RuleConfig::replace_numbers)) == "costs num or num");
  CHECK(normalize("nice 😀 day 🇶🇦!", only(&RuleConfig::strip_emoji)) == "nice day !");
  CHECK(normalize("café ok", only(&RuleConfig::strip_emoji)) == "café ok");
  CHECK(normalize("WHERE IS THE VISA OFFICE?", only(&RuleConfig::lowercase_if_shouty)) == "where is the visa office?");
  CHECK(normalize("Where is it?", only(&RuleConfig::lowercase_if_shouty)) == "Where is it?");
}

TEST_CASE("jargon replacement is whole-token and case-insensitive") {
  RuleConfig c;
  c.jargon_dict = builtin_jargon();
  CHECK(normalize("paid QAR today in doha", c) == "paid Qatar currency today in Doha");
  CHECK(normalize("qling all day on ql", c) == "browsing Qatar forum all day on Qatar forum");
  CHECK(normalize("qarry qlx", c) == "qarry qlx");
  CHECK(normalize("villagio, qatar.", c) == "Qatar shopping center, Qatar.");
}

TEST_CASE("full chain on the documented examples") {
  const auto all = RuleConfig::all_enabled();
  CHECK(normalize("paid 500 qar", all) == "paid num Qatar currency");
  CHECK(normalize("See http://a.b/c now", all) == "See url link now");
  CHECK(normalize("I arrived 1st and 5th", all) == "I arrived nth and nth");
  // Inserted text is never re-matched: the URL replacement stays intact and
  // "2nd" inside a URL is gone with it.
  CHECK(normalize("see http://x.y/2nd/500 on 3rd", all) == "see url link on nth");
}

TEST_CASE("shouty test counts ASCII letters with a strict majority") {
  CHECK_FALSE(is_shouty("HELLO world"));
  CHECK(is_shouty("HELLO World"));
  CHECK_FALSE(is_shouty("1234 !!"));
  CHECK_FALSE(is_shouty(""));
}

TEST_CASE("inserted words do not tip the shouty decision") {
  const auto all = RuleConfig::all_enabled();
  // Letters from "url link" must not count as lowercase.
  CHECK(normalize("SEE HTTP://A.B/C NOW", all) == "see url link now");
  // Built-in replacements keep their case when the rest is shouted.
  CHECK(normalize("PAID IN QAR", all) == "paid in Qatar currency");
}

TEST_CASE("normalize is idempotent on random text") {
  const std::vector<std::string> pieces = {
      "visa", "VISA", "Doha", "qar", "QL", "ql", "qling", "villagio", "1st", "22ND", "3rd", "500", "1,200.5",
      "12/05/2018", "2019-01-31", "10:30", "9:15 PM", "http://a.b/c", "www.x.org", "😀", "🇶🇦", "!", "?",
      ",", "hello", "WORLD", "café", "nth", "num", "url", "link", "date", "hour", "Qatar", "  ", "\t"};
  const auto all = RuleConfig::all_enabled();
  RngStream rng(11);
  for (int trial = 0; trial < 2000; ++trial) {
    std::string text;
    const auto n = rng.range(0, 12);
    for (std::int64_t i = 0; i < n; ++i) {
      text += pieces[rng.below(pieces.size())];
      if (rng.bernoulli(0.8)) text += ' ';
    }
    const auto once = normalize(text, all);
    const auto twice = normalize(once, all);
    INFO("text: " << text);
    CHECK(twice == once);
  }
}

TEST_CASE("jargon files") {
  const auto d = parse_jargon("# comment\n\nqar\tQatar currency\nql\tQatar forum\n");
  REQUIRE(d.size() == 2);
  CHECK(d[1].second == "Qatar forum");
  CHECK_THROWS_AS(parse_jargon("qar Qatar currency\n"), DataError);
  CHECK(load_jargon(std::string(DRR_DATA_DIR) + "/jargon.tsv") == builtin_jargon());
}
