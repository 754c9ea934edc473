// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "noisylab/corpus.hpp"

namespace noisylab {

// Sparse vector with strictly increasing indices and no stored zeros.
struct SparseVector {
  std::vector<std::pair<std::uint32_t, double>> entries;
  std::uint32_t dim = 0;

  double l2_norm() const;
};

// Lowercased tokens split on runs of non-alphanumeric characters. Bytes
// outside ASCII are treated as word characters so UTF-8 text stays intact.
std::vector<std::string> tokenize(std::string_view title);

class TfIdfModel {
 public:
  // Learns a unigram vocabulary and smoothed idf table:
  // idf(t) = ln((1 + N) / (1 + df(t))) + 1.
  static TfIdfModel fit(const std::vector<std::string>& train_titles);

  // tf * idf, L2-normalized. Unknown terms are ignored; a title with no
  // in-vocabulary terms maps to the zero vector.
  SparseVector vectorize(std::string_view title) const;

  std::size_t vocab_size() const { return idf_.size(); }
  std::size_t doc_count() const { return doc_count_; }
  double idf_of(std::string_view term) const;  // 0 when out of vocabulary

 private:
  std::unordered_map<std::string, std::uint32_t> vocab_;
  std::vector<double> idf_;
  std::size_t doc_count_ = 0;
};

// Cosine similarity; 0 when either vector is zero. Throws on dimension mismatch.
double cosine(const SparseVector& a, const SparseVector& b);
double cosine(std::span<const double> a, std::span<const double> b);

// Precomputed title embeddings keyed by item id, loaded from JSON lines
// {"id": ..., "vec": [...]} with a uniform vector width.
class EmbeddingTable {
 public:
  static EmbeddingTable load_jsonl(const std::filesystem::path& path);

  std::size_t width() const { return width_; }
  std::size_t size() const { return vectors_.size(); }
  const std::vector<double>* find(std::int64_t id) const;
  void insert(std::int64_t id, std::vector<double> vec);

 private:
  std::unordered_map<std::int64_t, std::vector<double>> vectors_;
  std::size_t width_ = 0;
};

// Pairwise title similarity in [0, 1]: the greater of the tf-idf cosine and
// the embedding cosine (each clamped to [0, 1]); tf-idf alone when no
// embedding table is supplied.
double similarity(const Item& i, const Item& j, const TfIdfModel& tfidf,
                  const EmbeddingTable* emb = nullptr);

}  // namespace noisylab
