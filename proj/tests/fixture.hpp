// SPDX-License-Identifier: Apache-2.0
//
// Synthetic corpora shared by the unit and acceptance suites. Titles are
// built from class-specific word pools plus shared filler; a slice of items
// mixes in neighbor-class words so classes overlap and instance-dependent
// corruption has confusable items to target.
#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "noisylab/classifier.hpp"
#include "noisylab/corpus.hpp"
#include "noisylab/rng.hpp"

namespace fixture {

inline noisylab::Corpus corpus_from_rows(
    const std::vector<std::pair<std::string, std::string>>& rows,
    const std::string& source = "fixture") {
  std::vector<noisylab::Item> items;
  std::vector<std::string> labels;
  std::unordered_map<std::string, int> index;
  std::int64_t next_id = 0;
  for (const auto& [title, label] : rows) {
    auto [it, inserted] = index.try_emplace(label, static_cast<int>(labels.size()));
    if (inserted) labels.push_back(label);
    noisylab::Item item;
    item.id = next_id++;
    item.title = title;
    item.true_label = item.observed_label = it->second;
    items.push_back(std::move(item));
  }
  return noisylab::Corpus(std::move(items), std::move(labels), source);
}

// Linearly separable two-class corpus; each class has its own small
// vocabulary, so ~100% train accuracy is attainable.
inline noisylab::Corpus toy_two_class(int n_items = 200, std::uint64_t seed = 7) {
  static const char* kRed[] = {"red", "apple", "cherry", "ripe", "berry", "crimson"};
  static const char* kBlue[] = {"blue", "chair", "table", "walnut", "oak", "desk"};
  std::vector<std::pair<std::string, std::string>> rows;
  for (int i = 0; i < n_items; ++i) {
    noisylab::rng::Stream st(noisylab::rng::chain(seed, static_cast<std::uint64_t>(i)));
    const bool red = i % 2 == 0;
    const char** pool = red ? kRed : kBlue;
    std::string title;
    const int words = 4 + static_cast<int>(st.next_u64() % 3);
    for (int w = 0; w < words; ++w) {
      if (w > 0) title += ' ';
      title += pool[st.next_u64() % 6];
    }
    rows.emplace_back(title, red ? "red_things" : "blue_things");
  }
  return corpus_from_rows(rows, "toy_two_class");
}

struct SyntheticSpec {
  int n_items = 10000;
  int num_classes = 5;
  std::uint64_t seed = 1234;
  double bridge_prob = 0.30;  // items with a few neighbor-class words
  double hard_prob = 0.08;    // items whose core words mix two classes
};

inline std::string synthetic_word(int cls, std::uint64_t k) {
  static const char* kStem[] = {"frt", "chr", "elc", "clt", "toy", "grm", "hsh", "pnt"};
  return std::string(kStem[cls % 8]) + std::to_string(k);
}

inline noisylab::Corpus make_synthetic(const SyntheticSpec& spec = {}) {
  constexpr int kCoreWords = 30;
  constexpr int kSharedWords = 80;
  std::vector<std::pair<std::string, std::string>> rows;
  rows.reserve(static_cast<std::size_t>(spec.n_items));
  for (int i = 0; i < spec.n_items; ++i) {
    noisylab::rng::Stream st(noisylab::rng::chain(spec.seed, static_cast<std::uint64_t>(i)));
    const int cls = i % spec.num_classes;
    const int neighbor =
        (cls + 1 + static_cast<int>(st.next_u64() % static_cast<std::uint64_t>(
                                        spec.num_classes - 1))) %
        spec.num_classes;
    const bool hard = st.next_unit() < spec.hard_prob;
    const bool bridged = !hard && st.next_unit() < spec.bridge_prob;

    std::vector<std::string> words;
    const int n_core = 3 + static_cast<int>(st.next_u64() % 3);
    for (int w = 0; w < n_core; ++w) {
      const int source = hard && w % 2 == 1 ? neighbor : cls;
      words.push_back(synthetic_word(source, st.next_u64() % kCoreWords));
    }
    if (bridged) {
      const int n_bridge = 1 + static_cast<int>(st.next_u64() % 2);
      for (int w = 0; w < n_bridge; ++w)
        words.push_back(synthetic_word(neighbor, st.next_u64() % kCoreWords));
    }
    const int n_shared = 2 + static_cast<int>(st.next_u64() % 3);
    for (int w = 0; w < n_shared; ++w)
      words.push_back("com" + std::to_string(st.next_u64() % kSharedWords));

    // deterministic interleave, keyed on the item stream
    for (std::size_t w = words.size(); w > 1; --w)
      std::swap(words[w - 1], words[st.next_u64() % w]);

    std::string title;
    for (const std::string& w : words) {
      if (!title.empty()) title += ' ';
      title += w;
    }
    rows.emplace_back(title, "cat" + std::to_string(cls));
  }
  return corpus_from_rows(rows, "synthetic");
}

// Training configuration used with the synthetic fixture: paper-scale epochs
// and batches, desk-scale feature and hidden dimensions.
inline noisylab::TrainConfig fixture_train_config(std::uint64_t seed) {
  noisylab::TrainConfig cfg;
  cfg.epochs = 10;
  cfg.batch_size = 16;
  cfg.learning_rate = 5e-4;
  cfg.gradient_clip_norm = 5.0;
  cfg.hidden_size = 32;
  cfg.seed = seed;
  cfg.features.max_ngram = 2;
  cfg.features.hash_bits = 13;
  return cfg;
}

}  // namespace fixture
