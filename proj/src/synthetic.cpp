#include "drr/synthetic.hpp"

#include <array>
#include <string>
#include <vector>

#include "drr/rng.hpp"

namespace drr::synthetic {

namespace {

constexpr std::array<const char*, 6> kCategories = {"Visas and permits", "Qatar Living Lounge", "Doha Shopping",
                                                    "Working in Qatar",  "Sports in Qatar",     "Education"};
constexpr std::array<const char*, 16> kWords = {"how",  "long", "visa",   "where", "best", "buy",   "any",   "one",
                                                "know", "good", "school", "work",  "fun",  "night", "place", "price"};

}  // namespace

BlobCorpus make_blob_corpus(const BlobOptions& opt) {
  const RngStream root(opt.seed);
  BlobCorpus out;
  out.train.name = "synthetic-train";
  out.test.name = "synthetic-test";

  auto text_rng = root.derive({1});
  const int total = opt.n_train + opt.n_test;
  std::vector<std::string> ids;
  for (int i = 0; i < total; ++i) {
    Question q;
    q.id = "q" + std::to_string(i);
    q.label = static_cast<Label>(i % 3);
    q.category = kCategories[text_rng.below(kCategories.size())];
    q.subject = kWords[text_rng.below(kWords.size())];
    for (int w = 0; w < 6; ++w) {
      if (w) q.body += ' ';
      q.body += kWords[text_rng.below(kWords.size())];
    }
    q.body += '?';
    ids.push_back(q.id);
    (i < opt.n_train ? out.train : out.test).questions.push_back(std::move(q));
  }

  auto mean_rng = root.derive({2});
  std::vector<std::vector<double>> means(kNumClasses, std::vector<double>(static_cast<std::size_t>(opt.informative_dims)));
  for (auto& m : means)
    for (auto& v : m) v = opt.class_spread * mean_rng.normal();

  const auto base = features::random_embedding_table(ids, features::kSentenceDim, opt.seed);
  auto noise_rng = root.derive({3});
  std::vector<double> row(features::kSentenceDim);
  for (int i = 0; i < total; ++i) {
    const auto src = base.row_at(static_cast<std::size_t>(i));
    std::copy(src.begin(), src.end(), row.begin());
    const auto& mu = means[static_cast<std::size_t>(i % 3)];
    for (std::size_t d = 0; d < mu.size(); ++d) row[d] = static_cast<float>(mu[d] + opt.noise * noise_rng.normal());
    out.embeddings.add(ids[static_cast<std::size_t>(i)], row);
  }

  auto wv_rng = root.derive({4});
  std::vector<double> vec(features::kWordDim);
  for (const char* w : kWords) {
    for (auto& v : vec) v = static_cast<float>(0.1 * wv_rng.normal());
    out.wordvecs.add(w, vec);
  }
  return out;
}

}  // namespace drr::synthetic
