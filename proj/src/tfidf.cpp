#include <algorithm>
#include <cmath>
#include <set>

#include "drr/baselines.hpp"
#include "drr/error.hpp"

namespace drr::baselines {

double SparseVector::squared_norm() const noexcept {
  double s = 0.0;
  for (const auto& [i, v] : entries) s += v * v;
  return s;
}

std::vector<SparseVector> to_sparse(const Matrix& x) {
  std::vector<SparseVector> rows(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    auto& sv = rows[static_cast<std::size_t>(r)];
    sv.dim = static_cast<std::size_t>(x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c)
      if (x(r, c) != 0.0) sv.entries.emplace_back(static_cast<std::uint32_t>(c), x(r, c));
  }
  return rows;
}

namespace {

// Byte offsets of UTF-8 codepoint starts, plus text.size() as a sentinel.
std::vector<std::size_t> codepoint_starts(std::string_view text) {
  std::vector<std::size_t> starts;
  for (std::size_t i = 0; i < text.size(); ++i)
    if ((static_cast<unsigned char>(text[i]) & 0xC0) != 0x80) starts.push_back(i);
  starts.push_back(text.size());
  return starts;
}

}  // namespace

std::map<std::string, int> char_ngrams(std::string_view text, int n_min, int n_max) {
  std::map<std::string, int> out;
  if (n_min < 1) n_min = 1;
  const auto starts = codepoint_starts(text);
  const std::size_t n_chars = starts.size() - 1;
  for (int n = n_min; n <= n_max; ++n) {
    const auto len = static_cast<std::size_t>(n);
    if (len > n_chars) break;
    for (std::size_t i = 0; i + len <= n_chars; ++i)
      ++out[std::string(text.substr(starts[i], starts[i + len] - starts[i]))];
  }
  return out;
}

TfidfModel tfidf_fit(std::span<const std::string> corpus, int n_min, int n_max) {
  if (n_min < 1 || n_min > n_max) {
    throw ConfigError("n-gram range must satisfy 1 <= n_min <= n_max, got " + std::to_string(n_min) + ".." +
                      std::to_string(n_max));
  }
  TfidfModel model;
  model.n_min = n_min;
  model.n_max = n_max;
  std::map<std::string, std::size_t> df;
  for (const auto& doc : corpus)
    for (const auto& [gram, count] : char_ngrams(doc, n_min, n_max)) ++df[gram];
  const double n_docs = static_cast<double>(corpus.size());
  model.idf.reserve(df.size());
  for (const auto& [gram, d] : df) {
    model.vocabulary.emplace(gram, static_cast<std::uint32_t>(model.idf.size()));
    model.idf.push_back(std::log((1.0 + n_docs) / (1.0 + static_cast<double>(d))) + 1.0);
  }
  return model;
}

SparseVector tfidf_transform(const TfidfModel& model, std::string_view text) {
  SparseVector sv;
  sv.dim = model.idf.size();
  for (const auto& [gram, count] : char_ngrams(text, model.n_min, model.n_max)) {
    auto it = model.vocabulary.find(gram);
    if (it == model.vocabulary.end()) continue;
    sv.entries.emplace_back(it->second, static_cast<double>(count) * model.idf[it->second]);
  }
  std::sort(sv.entries.begin(), sv.entries.end());
  const double norm = std::sqrt(sv.squared_norm());
  if (norm > 0.0)
    for (auto& e : sv.entries) e.second /= norm;
  return sv;
}

}  // namespace drr::baselines
