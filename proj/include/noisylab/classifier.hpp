// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "noisylab/corpus.hpp"

namespace noisylab {

// Hashed word n-gram featurization shared by the model and its trainer.
struct FeatureSpec {
  int max_ngram = 2;    // orders 1..max_ngram
  int hash_bits = 18;   // feature dimension = 2^hash_bits

  std::uint32_t dim() const { return std::uint32_t{1} << hash_bits; }
  bool operator==(const FeatureSpec&) const = default;
};

struct FeatureEntry {
  std::uint32_t index;
  double value;
};
using FeatureVec = std::vector<FeatureEntry>;

// Hashed {1..max_ngram}-gram counts of the tokenized title, L2-normalized.
FeatureVec featurize(std::string_view title, const FeatureSpec& spec);

struct TrainConfig {
  int epochs = 10;
  int batch_size = 16;
  double learning_rate = 5e-4;
  double gradient_clip_norm = 5.0;
  int hidden_size = 256;
  std::uint64_t seed = 0;
  FeatureSpec features{};

  void validate() const;
};

struct Prediction {
  std::vector<double> probs;
  int top1 = 0;
  int top2 = 0;
  double confidence = 0.0;
};

// Sparse features -> rectified hidden layer -> softmax.
class SoftmaxClassifier {
 public:
  SoftmaxClassifier() = default;
  // Weights drawn from uniform(-a, a), a = sqrt(6 / (fan_in + fan_out)); biases zero.
  SoftmaxClassifier(FeatureSpec spec, int hidden_size, std::vector<std::string> labels,
                    std::uint64_t init_seed);

  Prediction predict(std::string_view title) const;
  Prediction predict_features(const FeatureVec& x) const;

  const FeatureSpec& feature_spec() const { return spec_; }
  int hidden_size() const { return hidden_; }
  int num_classes() const { return static_cast<int>(labels_.size()); }
  const std::vector<std::string>& labels() const { return labels_; }

  // Parameter storage. w1 is feature-major (dim x hidden) so the update for
  // one hashed feature touches a contiguous row; w2 is class-major (K x hidden).
  std::vector<double> w1, b1, w2, b2;

  // Set by train(); serialized with the parameters.
  std::optional<TrainConfig> trained_with;

  void save(const std::filesystem::path& path) const;
  static SoftmaxClassifier load(const std::filesystem::path& path);

  bool same_shape_as(const SoftmaxClassifier& other) const;

 private:
  FeatureSpec spec_{};
  int hidden_ = 0;
  std::vector<std::string> labels_;
};

using CheckpointSequence = std::vector<SoftmaxClassifier>;

struct TrainLog {
  std::vector<double> epoch_mean_loss;
};

// Exact mean-cross-entropy gradient, sparse in the first layer.
struct Gradients {
  std::vector<std::pair<std::uint32_t, std::vector<double>>> w1_rows;  // sorted by feature index
  std::vector<double> b1, w2, b2;

  double squared_norm() const;
  void scale(double factor);
};

std::pair<double, Gradients> loss_and_gradient(
    const SoftmaxClassifier& m, const std::vector<std::pair<std::string, int>>& batch);

// Soft-target variant; each target distribution must match the label count.
std::pair<double, Gradients> loss_and_gradient_soft(
    const SoftmaxClassifier& m,
    const std::vector<std::pair<std::string, std::vector<double>>>& batch);

Prediction average_predictions(const std::vector<const SoftmaxClassifier*>& models,
                               const Item& item);
Prediction average_predictions(const std::vector<const SoftmaxClassifier*>& models,
                               std::string_view title);

using SoftLabelTable = std::unordered_map<std::int64_t, std::vector<double>>;

// Single-model training engine. Exposes per-epoch and per-batch control for
// the label-correction and co-training loops; `train` below wraps the plain
// schedule. All randomness is keyed on (seed, epoch, item id), so the result
// depends on the id set, not on item order.
class Trainer {
 public:
  Trainer(const Corpus& corpus, const TrainConfig& cfg);

  const TrainConfig& config() const { return cfg_; }
  const std::vector<std::int64_t>& ids() const { return ids_; }

  // Mini-batch schedule for a 1-based epoch.
  std::vector<std::vector<std::int64_t>> batches(int epoch) const;

  // One optimizer step on the given items: mean cross-entropy gradient,
  // global-norm clipping, then an Adam update. Returns the batch loss.
  double step(const std::vector<std::int64_t>& batch_ids);

  // Runs the full schedule for one epoch and records its mean loss.
  void run_epoch(int epoch);

  struct ItemEval {
    double loss;
    int argmax;
  };
  // Forward-only loss/argmax against current targets; no parameter update.
  std::vector<ItemEval> evaluate(const std::vector<std::int64_t>& batch_ids) const;

  int label(std::int64_t id) const;
  void set_label(std::int64_t id, int label);
  void set_soft_targets(const SoftLabelTable& table);  // overrides hard labels

  Prediction predict_item(std::int64_t id) const;
  const SoftmaxClassifier& model() const { return model_; }
  const TrainLog& log() const { return log_; }

 private:
  struct AdamState;
  const FeatureVec& features_of(std::int64_t id) const;
  void forward(const FeatureVec& x, std::vector<double>& hidden,
               std::vector<double>& probs, double& logsumexp_shifted) const;

  TrainConfig cfg_;
  SoftmaxClassifier model_;
  std::vector<std::int64_t> ids_;
  std::unordered_map<std::int64_t, std::size_t> index_of_;
  std::vector<FeatureVec> features_;
  std::vector<int> labels_;
  std::vector<std::vector<double>> soft_targets_;  // empty vector = one-hot label
  // Adam moments; first-layer moments are applied lazily per touched feature.
  std::vector<double> m_w1_, v_w1_, m_b1_, v_b1_, m_w2_, v_w2_, m_b2_, v_b2_;
  std::int64_t step_count_ = 0;
  TrainLog log_;
};

struct TrainResult {
  SoftmaxClassifier model;
  CheckpointSequence checkpoints;
  TrainLog log;
};

// Called after each completed epoch; may rewrite training labels in place.
using EpochHook = std::function<void(int epoch, Trainer& trainer)>;

// Plain training on observed labels: fixed shuffle schedule, per-epoch
// checkpoints, deterministic for a given seed and id set.
TrainResult train(const Corpus& c, const TrainConfig& cfg, const EpochHook& hook = nullptr,
                  bool record_checkpoints = true);

}  // namespace noisylab
