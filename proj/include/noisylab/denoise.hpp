// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "noisylab/classifier.hpp"
#include "noisylab/corpus.hpp"
#include "noisylab/noise.hpp"

namespace noisylab {

// Trims a title from both ends and caps its length:
//   1. drop leading words until the dropped ones total >= 5 letters, never
//      dropping once fewer than 4 words remain;
//   2. the same from the right;
//   3. drop trailing words while more than 15 remain.
// Letters are counted as non-whitespace code points.
std::string drop_words(std::string_view title);

struct DenoiseReport {
  std::size_t relabeled = 0;
  std::size_t removed = 0;
  std::size_t kept_unchanged = 0;
  double data_reduction = 0.0;                 // removed / original train size
  std::optional<double> noise_reduction;       // needs a flip manifest
  std::vector<int> emptied_classes;            // train classes left without items
};

enum class DenoiseAction { relabel, remove, keep };

struct DenoiseAuditEntry {
  std::int64_t id = 0;
  DenoiseAction action = DenoiseAction::keep;
  int label_original = 0;      // prediction on the original title
  double conf_original = 0.0;
  int label_dropped = 0;       // prediction on the word-dropped title
  double conf_dropped = 0.0;
};

struct DenoiseOutcome {
  Corpus corpus;
  DenoiseReport report;
  std::vector<DenoiseAuditEntry> audit;
};

// Relabels train items whose prediction is confident (top probability >=
// threshold on the original title) or certain (same label on original and
// word-dropped titles); removes items that are neither when both confidences
// are at or below the threshold. The model must be pre-trained on c's train
// split. When a flip manifest is supplied the report carries the noise-rate
// reduction.
DenoiseOutcome denoise(const Corpus& c, const SoftmaxClassifier& m, double threshold = 0.8,
                       const FlipManifest* manifest = nullptr);

void write_denoise_audit(const std::vector<DenoiseAuditEntry>& audit,
                         const std::filesystem::path& path);

}  // namespace noisylab
