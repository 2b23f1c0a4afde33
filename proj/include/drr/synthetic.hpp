#pragma once

#include <cstdint>

#include "drr/corpus.hpp"
#include "drr/features.hpp"

namespace drr::synthetic {

/// Gaussian-blob question corpus with the full feature-file trio.
struct BlobOptions {
  int n_train = 600;
  int n_test = 300;
  int informative_dims = 20;  // leading embedding dims carrying the class signal
  double class_spread = 1.0;  // std of the per-class means in informative dims
  double noise = 0.5;         // per-sample std in informative dims
  std::uint64_t seed = 0;
};

struct BlobCorpus {
  Dataset train;
  Dataset test;
  features::EmbeddingTable embeddings{features::kSentenceDim};
  features::WordVecTable wordvecs{features::kWordDim};
};

/// Labels cycle through the three classes; categories and texts are drawn
/// independently of the label, so only the informative embedding dims carry
/// signal. Non-informative dims come from random_embedding_table.
BlobCorpus make_blob_corpus(const BlobOptions& opt);

}  // namespace drr::synthetic
