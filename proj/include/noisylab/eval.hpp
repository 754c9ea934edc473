// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "noisylab/error.hpp"

namespace noisylab {

struct EvalReport {
  double macro_f1 = 0.0;
  std::vector<double> per_class_f1;
  std::vector<std::size_t> support;  // gold counts per class
  std::string config_fingerprint;
};

// One-vs-rest per-class F1, averaged without class weights. Classes that are
// never predicted and absent from gold contribute 0 unless
// include_zero_support is false, in which case they are left out of the mean.
EvalReport macro_f1(const std::vector<int>& predictions, const std::vector<int>& gold,
                    int num_classes, bool include_zero_support = true);

// Mean relative improvement in percent: mean_i 100 * (method_i - base_i) / base_i.
double recompute_api(const std::vector<double>& base, const std::vector<double>& method);

struct RunRecord {
  std::string dataset;
  std::string noise_method;  // "none" for clean runs
  double rate = 0.0;
  std::string trainer;       // base | den | seal | plc | coteaching_plus
  double macro_f1 = 0.0;
  std::uint64_t seed = 0;
};

struct ResultTable {
  struct Group {
    std::string noise_method;
    double rate;
    std::vector<std::string> datasets;
    // scores[dataset][column]; columns follow `columns`; NaN marks a missing cell
    std::vector<std::vector<double>> scores;
    std::vector<double> api;  // per column; NaN for the base column / no pairs
  };
  std::vector<std::string> columns;
  std::vector<Group> groups;

  std::string to_csv() const;
  std::string to_text() const;
};

// Groups runs per (noise method, rate) into a Base/DeN/SEAL/PLC/CTp grid with
// an API row. A duplicate (dataset, method, rate, trainer) key is an error.
ResultTable build_result_table(const std::vector<RunRecord>& runs);

}  // namespace noisylab
