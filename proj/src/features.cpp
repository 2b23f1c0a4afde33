#include "drr/features.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

#include <json.hpp>

#include "drr/error.hpp"
#include "drr/rng.hpp"
#include "drr/textio.hpp"

namespace drr::features {

void EmbeddingTable::add(std::string id, std::span<const double> values) {
  if (values.size() != dim_) {
    throw DataError("row '" + id + "' has " + std::to_string(values.size()) + " values, expected " +
                    std::to_string(dim_));
  }
  if (index_.contains(id)) throw DataError("duplicate id '" + id + "' in embedding table");
  index_.emplace(id, ids_.size());
  ids_.push_back(std::move(id));
  values_.insert(values_.end(), values.begin(), values.end());
}

std::span<const double> EmbeddingTable::row(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw DataError("no embedding row for id '" + id + "'");
  return row_at(it->second);
}

namespace {

std::size_t parse_dim_header(std::string_view line) {
  constexpr std::string_view prefix = "#dim=";
  std::size_t dim = 0;
  if (line.substr(0, prefix.size()) != prefix) throw DataError("embedding table: missing '#dim=<d>' header");
  auto digits = line.substr(prefix.size());
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), dim);
  if (ec != std::errc() || ptr != digits.data() + digits.size() || dim == 0)
    throw DataError("embedding table: bad header '" + std::string(line) + "'");
  return dim;
}

EmbeddingTable parse_table_body(const std::vector<std::string_view>& lines, std::size_t dim) {
  EmbeddingTable table(dim);
  std::vector<double> values;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto line = lines[i];
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos || tab == 0)
      throw DataError("embedding table line " + std::to_string(i + 1) + ": expected id<TAB>values");
    std::string id(line.substr(0, tab));
    values.clear();
    for (auto f : split_fields(line.substr(tab + 1))) {
      double v;
      if (!parse_float(f, v)) {
        throw DataError("embedding table line " + std::to_string(i + 1) + " (id '" + id +
                        "'): non-numeric value '" + std::string(f) + "'");
      }
      values.push_back(v);
    }
    table.add(std::move(id), values);
  }
  return table;
}

}  // namespace

EmbeddingTable parse_embedding_table(std::string_view text, std::size_t expected_dim) {
  const auto lines = split_lines(text);
  if (lines.empty()) throw DataError("embedding table: empty file");
  const auto dim = parse_dim_header(lines[0]);
  if (dim != expected_dim) {
    throw DataError("embedding table declares dim " + std::to_string(dim) + ", expected " +
                    std::to_string(expected_dim));
  }
  return parse_table_body(lines, dim);
}

EmbeddingTable load_embedding_table(const std::filesystem::path& path, std::size_t expected_dim) {
  return parse_embedding_table(read_file(path), expected_dim);
}

EmbeddingTable load_embedding_table_any(const std::filesystem::path& path) {
  const auto text = read_file(path);
  const auto lines = split_lines(text);
  if (lines.empty()) throw DataError("embedding table: empty file '" + path.string() + "'");
  return parse_table_body(lines, parse_dim_header(lines[0]));
}

std::string format_embedding_table(const EmbeddingTable& table) {
  std::string out = "#dim=" + std::to_string(table.dim()) + "\n";
  for (std::size_t i = 0; i < table.size(); ++i) {
    out += table.ids()[i];
    out += '\t';
    const auto row = table.row_at(i);
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k) out += ' ';
      out += format_float(row[k]);
    }
    out += '\n';
  }
  return out;
}

void save_embedding_table(const EmbeddingTable& table, const std::filesystem::path& path) {
  write_file(path, format_embedding_table(table));
}

EmbeddingTable random_embedding_table(std::span<const std::string> ids, std::size_t dim,
                                      std::uint64_t seed) {
  EmbeddingTable table(dim);
  const RngStream root(seed);
  std::vector<double> v(dim);
  for (const auto& id : ids) {
    auto rng = root.derive({hash_string(id)});
    double norm2 = 0.0;
    for (auto& x : v) {
      x = rng.normal();
      norm2 += x * x;
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& x : v) x = static_cast<float>(x * inv);
    table.add(id, v);
  }
  return table;
}

void WordVecTable::add(std::string token, std::span<const double> values) {
  if (token.empty()) throw DataError("empty token in word-vector table");
  if (values.size() != dim_) {
    throw DataError("vector for '" + token + "' has " + std::to_string(values.size()) +
                    " components, expected " + std::to_string(dim_));
  }
  if (index_.contains(token)) throw DataError("token '" + token + "' repeated in word-vector table");
  index_.emplace(token, values_.size());
  tokens_.push_back(std::move(token));
  values_.insert(values_.end(), values.begin(), values.end());
}

const double* WordVecTable::find(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? nullptr : values_.data() + it->second;
}

WordVecTable parse_wordvecs(std::string_view text) {
  const auto lines = split_lines(text);
  if (lines.empty()) throw DataError("word vectors: empty file");
  const auto header = split_fields(lines[0]);
  std::size_t count = 0, dim = 0;
  auto parse_size = [](std::string_view s, std::size_t& out) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
  };
  if (header.size() != 2 || !parse_size(header[0], count) || !parse_size(header[1], dim) || dim == 0)
    throw DataError("word vectors line 1: expected 'count dim' header");

  WordVecTable table(dim);
  std::vector<double> values;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = split_fields(lines[i]);
    if (fields.size() != dim + 1) {
      throw DataError("word vectors line " + std::to_string(i + 1) + ": expected " +
                      std::to_string(dim) + " components, found " + std::to_string(fields.size() - 1));
    }
    values.clear();
    for (std::size_t k = 1; k < fields.size(); ++k) {
      double v;
      if (!parse_float(fields[k], v)) {
        throw DataError("word vectors line " + std::to_string(i + 1) + ": non-numeric component '" +
                        std::string(fields[k]) + "'");
      }
      values.push_back(v);
    }
    table.add(std::string(fields[0]), values);
  }
  if (table.size() != count) {
    throw DataError("word vectors: header declares " + std::to_string(count) + " entries, found " +
                    std::to_string(table.size()));
  }
  return table;
}

std::string format_wordvecs(const WordVecTable& table) {
  std::string out = std::to_string(table.size()) + " " + std::to_string(table.dim()) + "\n";
  for (const auto& tok : table.tokens()) {
    out += tok;
    const double* v = table.find(tok);
    for (std::size_t k = 0; k < table.dim(); ++k) {
      out += ' ';
      out += format_float(v[k]);
    }
    out += '\n';
  }
  return out;
}

void save_wordvecs(const WordVecTable& table, const std::filesystem::path& path) {
  write_file(path, format_wordvecs(table));
}

WordVecTable load_wordvecs(const std::filesystem::path& path) { return parse_wordvecs(read_file(path)); }

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  auto is_punct = [](char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; };
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j == i) break;
    auto word = text.substr(i, j - i);
    i = j;

    std::size_t lead = 0;
    while (lead < word.size() && is_punct(word[lead])) ++lead;
    for (std::size_t k = 0; k < lead; ++k) tokens.emplace_back(1, word[k]);
    word.remove_prefix(lead);
    std::size_t core = word.size();
    while (core > 0 && is_punct(word[core - 1])) --core;
    if (core > 0) tokens.emplace_back(word.substr(0, core));
    for (std::size_t k = core; k < word.size(); ++k) tokens.emplace_back(1, word[k]);
  }
  return tokens;
}

std::vector<double> avg_wordvecs(std::span<const std::string> tokens, const WordVecTable& table) {
  std::vector<double> sum(table.dim(), 0.0);
  std::size_t matched = 0;
  std::string lowered;
  for (const auto& tok : tokens) {
    const double* v = table.find(tok);
    if (!v) {
      lowered = tok;
      for (auto& c : lowered) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      v = table.find(lowered);
    }
    if (!v) continue;
    ++matched;
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += v[k];
  }
  if (matched > 0)
    for (auto& x : sum) x /= static_cast<double>(matched);
  return sum;
}

const std::array<double, kNumClasses>& CategoryStats::lookup(const std::string& category) const {
  auto it = per_category.find(category);
  return it == per_category.end() ? global : it->second;
}

CategoryStats fit_category_stats(const Dataset& train) {
  if (train.empty()) throw DataError("cannot fit category statistics on an empty dataset");
  std::map<std::string, std::array<double, kNumClasses>> counts;
  std::array<double, kNumClasses> total{};
  for (const auto& q : train.questions) {
    if (!q.label) throw DataError("training question '" + q.id + "' has no label");
    counts[q.category][index_of(*q.label)] += 1.0;
    total[index_of(*q.label)] += 1.0;
  }
  auto normalized = [](std::array<double, kNumClasses> c) {
    const double n = c[0] + c[1] + c[2];
    for (auto& x : c) x /= n;
    return c;
  };
  CategoryStats cs;
  for (const auto& [cat, c] : counts) cs.per_category.emplace(cat, normalized(c));
  cs.global = normalized(total);
  return cs;
}

std::string category_stats_to_json(const CategoryStats& cs) {
  nlohmann::ordered_json j;
  j["global"] = cs.global;
  j["per_category"] = nlohmann::ordered_json::object();
  for (const auto& [cat, v] : cs.per_category) j["per_category"][cat] = v;
  return j.dump(2) + "\n";
}

CategoryStats category_stats_from_json(std::string_view json) {
  try {
    const auto j = nlohmann::json::parse(json);
    CategoryStats cs;
    cs.global = j.at("global").get<std::array<double, kNumClasses>>();
    for (const auto& [cat, v] : j.at("per_category").items())
      cs.per_category.emplace(cat, v.get<std::array<double, kNumClasses>>());
    return cs;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("category statistics: ") + e.what());
  }
}

FeatureVector assemble(const Question& q, const EmbeddingTable& emb, const WordVecTable& wv,
                       const CategoryStats& cs) {
  if (emb.dim() != kSentenceDim)
    throw DataError("sentence embeddings must have dim " + std::to_string(kSentenceDim));
  if (wv.dim() != kWordDim) throw DataError("word vectors must have dim " + std::to_string(kWordDim));
  FeatureVector out;
  out.reserve(kFeatureDim);
  const auto sent = emb.row(q.id);
  out.insert(out.end(), sent.begin(), sent.end());
  const auto avg = avg_wordvecs(tokenize(concat_text(q)), wv);
  out.insert(out.end(), avg.begin(), avg.end());
  const auto& stats = cs.lookup(q.category);
  out.insert(out.end(), stats.begin(), stats.end());
  return out;
}

EmbeddingTable featurize(const Dataset& ds, const EmbeddingTable& emb, const WordVecTable& wv,
                         const CategoryStats& cs) {
  EmbeddingTable out(kFeatureDim);
  for (const auto& q : ds.questions) out.add(q.id, assemble(q, emb, wv, cs));
  return out;
}

}  // namespace drr::features
