// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "noisylab/classifier.hpp"
#include "noisylab/corpus.hpp"
#include "noisylab/features.hpp"

namespace noisylab {

enum class NoiseMethod { last_epoch, multi_epoch, multi_model, similarity };

std::string to_string(NoiseMethod m);
NoiseMethod noise_method_from_string(const std::string& s);

struct NoiseParams {
  int model_count = 5;                 // independent trainings for multi_model
  std::size_t similarity_cap = 2000;   // per-class comparison cap above the exact-scale limit
  std::size_t exact_pairwise_limit = 50000;
  TrainConfig train{};                 // config for trainings run inside a simulator
};

struct NoiseSpec {
  NoiseMethod method = NoiseMethod::last_epoch;
  double rate = 0.2;
  std::uint64_t seed = 0;
  NoiseParams params{};
};

struct Flip {
  int old_label = 0;  // always the true label; labels are corrupted once
  int new_label = 0;
  double score = 0.0;
};

struct NoiseResult {
  Corpus corpus;                    // train-split observed labels replaced
  std::map<std::int64_t, Flip> flips;
  double achieved_rate = 0.0;
  NoiseMethod method = NoiseMethod::last_epoch;
  std::uint64_t seed = 0;
};

// Flips an item to its runner-up label with probability min(1, f * s) where
// s = 1 - (p_top1 - p_top2); the factor f is found by bisection until the
// achieved rate lands in [rate - 0.005, rate + 0.005]. The model must be
// trained on the clean train split.
NoiseResult last_epoch_idn(const Corpus& c, const SoftmaxClassifier& m, const NoiseSpec& spec);

// Scores each item by the checkpoint-averaged probability of its best label
// other than the truth, then flips the top round(rate * train size) items.
NoiseResult multi_epoch_idn(const Corpus& c, const CheckpointSequence& seq,
                            const NoiseSpec& spec);

// Trains params.model_count classifiers (seeds seed+1..seed+count), keeps each
// run's final epoch, and applies the multi-epoch scoring over that set.
NoiseResult multi_model_idn(const Corpus& c, const NoiseSpec& spec);

// Draws the noisy label from a multinomial over per-class maximum title
// similarities, scores items by the similarity to the drawn label, and flips
// the top round(rate * train size).
NoiseResult similarity_idn(const Corpus& c, const TfIdfModel& tfidf, const EmbeddingTable* emb,
                           const NoiseSpec& spec);

struct NoiseMeasure {
  double achieved_rate = 0.0;
  std::vector<std::vector<std::size_t>> transition;  // [old][new] flip counts
};

NoiseMeasure measure_noise(const NoiseResult& result);

// JSON lines {"id","true","noisy","score","method","seed"}; the only artifact
// that stores true labels next to noisy ones.
void write_flip_manifest(const NoiseResult& result, const std::filesystem::path& path);

struct ManifestEntry {
  int true_label = 0;
  int noisy_label = 0;
  double score = 0.0;
};
using FlipManifest = std::map<std::int64_t, ManifestEntry>;

FlipManifest read_flip_manifest(const std::filesystem::path& path);

namespace detail {
// Stable descending-by-score order; ties broken by ascending id.
std::vector<std::size_t> rank_by_score_desc(const std::vector<std::int64_t>& ids,
                                            const std::vector<double>& scores);
// Index draw proportional to non-negative weights; deterministic in `hash`.
std::size_t multinomial_draw(const std::vector<double>& weights, std::uint64_t hash);
}  // namespace detail

}  // namespace noisylab
