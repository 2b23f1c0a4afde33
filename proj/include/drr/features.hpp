#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "drr/corpus.hpp"

namespace drr::features {

inline constexpr std::size_t kSentenceDim = 512;
inline constexpr std::size_t kWordDim = 300;
inline constexpr std::size_t kCategoryDim = 3;
inline constexpr std::size_t kFeatureDim = kSentenceDim + kWordDim + kCategoryDim;  // 815

/// Id-keyed table of fixed-width vectors; rows keep file order. Also used as
/// the on-disk format for assembled feature vectors (dim 815).
class EmbeddingTable {
 public:
  explicit EmbeddingTable(std::size_t dim = 0) : dim_(dim) {}

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return ids_.size(); }
  const std::vector<std::string>& ids() const noexcept { return ids_; }

  /// Throws DataError on wrong width or duplicate id.
  void add(std::string id, std::span<const double> values);
  bool contains(const std::string& id) const { return index_.contains(id); }
  /// Throws DataError naming the id if absent.
  std::span<const double> row(const std::string& id) const;
  std::span<const double> row_at(std::size_t i) const { return {values_.data() + i * dim_, dim_}; }

 private:
  std::size_t dim_;
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> values_;
};

/// Header `#dim=<d>`, then `id<TAB>v1 ... vd` per line.
EmbeddingTable load_embedding_table(const std::filesystem::path& path, std::size_t expected_dim);
EmbeddingTable parse_embedding_table(std::string_view text, std::size_t expected_dim);
/// Header `#dim=<d>` is taken from the file.
EmbeddingTable load_embedding_table_any(const std::filesystem::path& path);
std::string format_embedding_table(const EmbeddingTable& table);
void save_embedding_table(const EmbeddingTable& table, const std::filesystem::path& path);

/// Deterministic unit-norm vectors keyed by (seed, id); stands in for a
/// pretrained sentence encoder in tests and demos.
EmbeddingTable random_embedding_table(std::span<const std::string> ids, std::size_t dim,
                                      std::uint64_t seed);

class WordVecTable {
 public:
  explicit WordVecTable(std::size_t dim = 0) : dim_(dim) {}
  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return index_.size(); }
  void add(std::string token, std::span<const double> values);
  /// nullptr when absent.
  const double* find(const std::string& token) const;
  /// Tokens in insertion order.
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

 private:
  std::size_t dim_;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> values_;
};

/// Text word-vector format: "count dim" header, then "token v1 ... v_dim".
WordVecTable load_wordvecs(const std::filesystem::path& path);
WordVecTable parse_wordvecs(std::string_view text);
std::string format_wordvecs(const WordVecTable& table);
void save_wordvecs(const WordVecTable& table, const std::filesystem::path& path);

/// Whitespace split, then leading and trailing ASCII punctuation peeled off
/// into single-character tokens. Case is preserved.
std::vector<std::string> tokenize(std::string_view text);

/// Mean over tokens found in the table (exact, then lowercase lookup).
/// Unmatched tokens are skipped; no matches gives the zero vector.
std::vector<double> avg_wordvecs(std::span<const std::string> tokens, const WordVecTable& table);

struct CategoryStats {
  std::map<std::string, std::array<double, kNumClasses>> per_category;
  std::array<double, kNumClasses> global{};

  /// Falls back to `global` for categories not seen in training.
  const std::array<double, kNumClasses>& lookup(const std::string& category) const;
};

/// Label ratios per category over the training split only.
CategoryStats fit_category_stats(const Dataset& train);
std::string category_stats_to_json(const CategoryStats& cs);
CategoryStats category_stats_from_json(std::string_view json);

using FeatureVector = std::vector<double>;

/// [0,512) sentence embedding | [512,812) word average | [812,815) category stats.
FeatureVector assemble(const Question& q, const EmbeddingTable& emb, const WordVecTable& wv,
                       const CategoryStats& cs);

/// assemble() over a dataset, as a dim-815 table in dataset order.
EmbeddingTable featurize(const Dataset& ds, const EmbeddingTable& emb, const WordVecTable& wv,
                         const CategoryStats& cs);

}  // namespace drr::features
