// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "noisylab/classifier.hpp"
#include "noisylab/corpus.hpp"
#include "noisylab/eval.hpp"
#include "noisylab/noise.hpp"

namespace noisylab {

// Flat key/value experiment description; see parse_config_file for the key
// set. Values mirror the module configs and hash into a run fingerprint.
struct ExperimentConfig {
  std::filesystem::path dataset_path;
  std::string dataset_name;  // defaults to the dataset file stem
  char delimiter = ',';
  std::size_t min_count = 10;
  double test_fraction = 0.1;
  std::uint64_t seed = 0;

  bool noise_enabled = false;
  NoiseMethod noise_method = NoiseMethod::last_epoch;
  double noise_rate = 0.2;
  int noise_model_count = 5;
  std::size_t similarity_cap = 2000;
  std::filesystem::path embeddings_path;  // optional

  bool denoise_enabled = false;
  double denoise_threshold = 0.8;

  std::string trainer = "base";  // base | seal | plc | coteaching_plus
  TrainConfig train{};

  int seal_iterations = 3;
  int plc_warmup_epochs = 4;
  double plc_theta0 = 0.95;
  double plc_threshold_step = 0.05;
  double plc_floor = 0.80;
  double ctp_tau = -1.0;  // negative: use the injected noise rate
  int ctp_ramp_epochs = 5;
  std::uint64_t ctp_second_seed_offset = 1;

  std::filesystem::path out_dir = "runs/run";

  void apply(const std::string& key, const std::string& value);
  std::string canonical_text() const;
  std::uint64_t config_hash() const;
  std::string effective_dataset_name() const;
  void validate() const;
};

ExperimentConfig parse_config_file(const std::filesystem::path& path);

struct SuiteCell {
  std::string name;
  std::vector<std::pair<std::string, std::string>> overrides;
};

struct SuiteSpec {
  ExperimentConfig base;
  std::vector<SuiteCell> cells;  // empty: one implicit cell named "run"
};

SuiteSpec parse_suite_file(const std::filesystem::path& path);

struct RunOutcome {
  std::filesystem::path dir;
  EvalReport eval;
  RunRecord record;
};

// Executes load -> filter -> split -> (noise) -> (denoise) -> train -> eval,
// writing every artifact plus a manifest with the config hash into the run
// directory. Deterministic: the same config yields byte-identical artifacts.
RunOutcome run_experiment(const ExperimentConfig& cfg);

struct SuiteOutcome {
  std::filesystem::path dir;
  std::vector<RunRecord> records;
  std::vector<std::pair<std::string, std::string>> failures;  // (cell, error)
  ResultTable table;
};

// Runs each cell with a seed derived from (master seed, cell name), collects
// the per-run records and assembles the aggregate tables. Cell failures are
// recorded and do not stop the suite.
SuiteOutcome run_suite(const SuiteSpec& spec,
                       const std::optional<std::filesystem::path>& out_override = {});

std::vector<RunRecord> read_run_records(const std::vector<std::filesystem::path>& roots);

}  // namespace noisylab
