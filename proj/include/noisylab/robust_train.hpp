// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "noisylab/classifier.hpp"
#include "noisylab/corpus.hpp"
#include "noisylab/eval.hpp"

namespace noisylab {

// Macro F1 of the model's predictions against true labels on one split.
EvalReport evaluate_on_split(const Corpus& c, const SoftmaxClassifier& m, Split split);

struct SealConfig {
  int iterations = 3;
  TrainConfig train{};

  void validate() const;
};

struct SealResult {
  SoftmaxClassifier model;                 // final iteration
  std::vector<EvalReport> per_iteration;   // test-split report after each iteration
  SoftLabelTable soft_labels;              // targets the final iteration trained against
};

// Iteration 0 trains on the observed labels; every later iteration retrains
// from scratch against soft labels formed by averaging the previous
// iteration's per-epoch prediction vectors on each train item.
SealResult train_seal(const Corpus& c, const SealConfig& cfg);

struct PlcConfig {
  int warmup_epochs = 4;
  double theta0 = 0.95;
  double threshold_step = 0.05;
  double theta_floor = 0.80;
  TrainConfig train{};

  void validate() const;
};

struct PlcCorrection {
  int epoch = 0;
  std::int64_t id = 0;
  int old_label = 0;
  int new_label = 0;
  double confidence = 0.0;
};

struct PlcResult {
  SoftmaxClassifier model;
  std::vector<PlcCorrection> corrections;
};

// Plain training during warm-up; afterwards, any train item predicted with
// confidence >= the current threshold is relabeled to the prediction. The
// threshold decays by threshold_step per post-warm-up epoch down to its floor.
PlcResult train_plc(const Corpus& c, const PlcConfig& cfg);

struct CtpConfig {
  double estimated_noise_rate = 0.0;  // tau
  int ramp_epochs = 5;                // forget-rate ramp length
  TrainConfig train{};                // seed drives model A and the batch schedule
  std::uint64_t second_seed = 1;      // model B initialization

  void validate() const;
};

struct CtpSelectionEvent {
  int epoch = 0;
  int batch = 0;
  int model = 0;  // which model selected (its peer trained on the selection)
  bool fallback = false;
  std::vector<std::pair<std::int64_t, double>> selected;  // (id, loss)
  std::vector<std::pair<std::int64_t, double>> rejected;
};

struct CtpResult {
  SoftmaxClassifier model_a;  // evaluation model
  SoftmaxClassifier model_b;
  std::vector<CtpSelectionEvent> selections;
};

// Two peer models trained on a shared batch schedule. Within each batch the
// keep fraction is 1 - tau * min(epoch / ramp_epochs, 1); selection runs over
// items where the models' argmax predictions disagree (over the whole batch
// when there is no disagreement), each model picks its smallest-loss subset,
// and the peer updates on it.
CtpResult train_coteaching_plus(const Corpus& c, const CtpConfig& cfg);

void write_plc_corrections(const std::vector<PlcCorrection>& log,
                           const std::filesystem::path& path);
void write_ctp_selections(const std::vector<CtpSelectionEvent>& log,
                          const std::filesystem::path& path);

}  // namespace noisylab
