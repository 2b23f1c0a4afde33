#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include "drr/container.hpp"
#include "drr/error.hpp"
#include "drr/parallel.hpp"
#include "drr/rng.hpp"
#include "drr/textio.hpp"
#include "helpers.hpp"

using namespace drr;

TEST_CASE("rng matches the reference SplitMix64 sequence") {
  // Reference values for seed 1234567 from the published splitmix64.c.
  RngStream r(1234567);
  CHECK(r.next_u64() == 6457827717110365317ULL);
  CHECK(r.next_u64() == 3203168211198807973ULL);
  CHECK(r.next_u64() == 9817491932198370423ULL);
  CHECK(r.counter() == 3);
}

TEST_CASE("rng draws are reproducible and derive() leaves the parent alone") {
  RngStream a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  const auto before = a.counter();
  auto c1 = a.derive({3, 1});
  auto c2 = a.derive({3, 1});
  auto c3 = a.derive({1, 3});
  CHECK(a.counter() == before);
  CHECK(c1.seed() == c2.seed());
  CHECK(c1.seed() != c3.seed());
}

TEST_CASE("rng uniform, below and normal have the expected moments") {
  RngStream r(9);
  const int n = 200000;
  double sum = 0, sq = 0, nsum = 0, nsq = 0;
  std::array<int, 7> hist{};
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
    sq += u * u;
    ++hist[r.below(7)];
    const double z = r.normal();
    nsum += z;
    nsq += z * z;
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(sq / n - (sum / n) * (sum / n) == doctest::Approx(1.0 / 12).epsilon(0.02));
  for (int h : hist) CHECK(std::abs(h - n / 7.0) < 5 * std::sqrt(n / 7.0));
  CHECK(std::abs(nsum / n) < 0.01);
  CHECK(nsq / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("rng range is inclusive and shuffle is a permutation") {
  RngStream r(5);
  std::set<std::int64_t> seen;
  for (int i = 0; i < 1000; ++i) seen.insert(r.range(-2, 2));
  CHECK(seen == std::set<std::int64_t>{-2, -1, 0, 1, 2});
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  auto w = v;
  r.shuffle(w);
  CHECK(w != v);
  std::sort(w.begin(), w.end());
  CHECK(w == v);
}

TEST_CASE("hash_string is FNV-1a") {
  CHECK(hash_string("") == 0xcbf29ce484222325ULL);
  CHECK(hash_string("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(hash_string("foobar") == 0x85944171f73967e8ULL);
}

namespace {

Container sample_container() {
  Container c;
  c.kind = "unit";
  c.set_string("name", "alpha");
  c.set_scalar("pi", 3.141592653589793);
  c.set_scalar("tiny", 5e-324);
  c.add_array("w", {2, 3}, {1, -2, 3.5, 0.1, -0.0, 1e300});
  c.add_array("b", {3}, {0, 0, 1});
  return c;
}

}  // namespace

TEST_CASE("container round-trips bit-exactly") {
  const auto c = sample_container();
  const auto d = decode_container(encode_container(c));
  CHECK(d.kind == "unit");
  CHECK(d.string("name") == "alpha");
  CHECK(d.scalar("pi") == 3.141592653589793);
  CHECK(d.scalar("tiny") == 5e-324);
  CHECK(d.array("w").shape == std::vector<std::uint64_t>{2, 3});
  CHECK(d.array("w").data == c.array("w").data);
  CHECK(std::signbit(d.array("w").data[4]));
  CHECK(d.find_array("missing") == nullptr);
  CHECK_FALSE(d.find_scalar("missing").has_value());
  CHECK_THROWS_AS(d.scalar("missing"), DataError);
}

TEST_CASE("container rejects corrupt input with specific errors") {
  auto bytes = encode_container(sample_container());

  SUBCASE("bad magic") {
    bytes[0] = 'X';
    CHECK_THROWS_AS(decode_container(bytes), DataError);
  }
  SUBCASE("wrong version") {
    bytes[4] = 2;
    CHECK_THROWS_AS(decode_container(bytes), VersionError);
  }
  SUBCASE("truncation anywhere") {
    for (std::size_t cut = 0; cut < bytes.size(); cut += 7) {
      std::vector<char> part(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(cut));
      CHECK_THROWS_AS(decode_container(part), TruncatedError);
    }
  }
  SUBCASE("trailer missing") {
    bytes.resize(bytes.size() - 1);
    CHECK_THROWS_AS(decode_container(bytes), TruncatedError);
  }
  SUBCASE("shape does not match payload") {
    Container c;
    c.kind = "unit";
    CHECK_THROWS_AS(c.add_array("w", {2, 2}, {1, 2, 3}), ShapeError);
  }
}

TEST_CASE("container file round trip and missing file") {
  test::TempDir dir("container");
  save_container(sample_container(), dir / "c.bin");
  CHECK(load_container(dir / "c.bin").array("b").data == std::vector<double>{0, 0, 1});
  CHECK_THROWS_AS(load_container(dir / "nope.bin"), DataError);
}

TEST_CASE("text helpers") {
  const auto lines = split_lines("a\r\nb\n\nc\n");
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == "a");
  CHECK(lines[2] == "");
  CHECK(lines[3] == "c");
  CHECK(split_lines("").empty());

  const auto f = split_fields("  x\t y  z ");
  REQUIRE(f.size() == 3);
  CHECK(f[2] == "z");

  double v = 0;
  CHECK(parse_float("0.25", v));
  CHECK(v == 0.25);
  CHECK(parse_float("-1e-3", v));
  CHECK(v == static_cast<double>(-1e-3f));
  CHECK_FALSE(parse_float("1.0x", v));
  CHECK_FALSE(parse_float("", v));
  CHECK_FALSE(parse_float("nan", v));
  CHECK_FALSE(parse_float("inf", v));
  CHECK_FALSE(parse_float("1e60", v));

  for (double x : {0.1, -3.75, 1e-7, 123456.789}) {
    double back = 0;
    REQUIRE(parse_float(format_float(x), back));
    CHECK(back == static_cast<double>(static_cast<float>(x)));
  }
}

TEST_CASE("parallel_for covers every index once and rethrows the lowest failure") {
  for (int jobs : {1, 3, 8}) {
    std::vector<int> hits(37, 0);
    parallel_for(hits.size(), jobs, [&](std::size_t i) { hits[i] += 1; });
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  }
  try {
    parallel_for(10, 4, [](std::size_t i) {
      if (i == 3 || i == 7) throw DataError("fail " + std::to_string(i));
    });
    FAIL("expected an exception");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()) == "fail 3");
  }
}
