// SPDX-License-Identifier: Apache-2.0
#include "noisylab/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace noisylab {

EvalReport macro_f1(const std::vector<int>& predictions, const std::vector<int>& gold,
                    int num_classes, bool include_zero_support) {
  if (predictions.size() != gold.size())
    throw Error("macro_f1: prediction/gold length mismatch");
  if (predictions.empty()) throw Error("macro_f1: empty input");
  if (num_classes < 1) throw Error("macro_f1: num_classes must be >= 1");

  const std::size_t k = static_cast<std::size_t>(num_classes);
  std::vector<std::size_t> tp(k, 0), fp(k, 0), fn(k, 0), support(k, 0), predicted(k, 0);
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const int g = gold[i], p = predictions[i];
    if (g < 0 || g >= num_classes || p < 0 || p >= num_classes)
      throw Error("macro_f1: label out of range at position " + std::to_string(i));
    support[static_cast<std::size_t>(g)]++;
    predicted[static_cast<std::size_t>(p)]++;
    if (g == p)
      tp[static_cast<std::size_t>(g)]++;
    else {
      fn[static_cast<std::size_t>(g)]++;
      fp[static_cast<std::size_t>(p)]++;
    }
  }

  EvalReport report;
  report.support = support;
  report.per_class_f1.resize(k, 0.0);
  double sum = 0.0;
  std::size_t counted = 0;
  for (std::size_t c = 0; c < k; ++c) {
    const double precision =
        tp[c] + fp[c] == 0 ? 0.0 : static_cast<double>(tp[c]) / static_cast<double>(tp[c] + fp[c]);
    const double recall =
        tp[c] + fn[c] == 0 ? 0.0 : static_cast<double>(tp[c]) / static_cast<double>(tp[c] + fn[c]);
    const double f1 =
        precision + recall == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
    report.per_class_f1[c] = f1;
    if (!include_zero_support && support[c] == 0 && predicted[c] == 0) continue;
    sum += f1;
    counted++;
  }
  if (counted == 0) throw Error("macro_f1: no classes to average");
  report.macro_f1 = sum / static_cast<double>(counted);
  report.config_fingerprint = "macro_f1:v1:include_zero_support=" +
                              std::string(include_zero_support ? "1" : "0") +
                              ":K=" + std::to_string(num_classes);
  return report;
}

double recompute_api(const std::vector<double>& base, const std::vector<double>& method) {
  if (base.size() != method.size()) throw Error("recompute_api: length mismatch");
  if (base.empty()) throw Error("recompute_api: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < base.size(); ++i) {
    if (!(base[i] > 0.0)) throw Error("recompute_api: base score must be positive");
    sum += 100.0 * (method[i] - base[i]) / base[i];
  }
  return sum / static_cast<double>(base.size());
}

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

int column_of(const std::string& trainer) {
  if (trainer == "base") return 0;
  if (trainer == "den") return 1;
  if (trainer == "seal") return 2;
  if (trainer == "plc") return 3;
  if (trainer == "coteaching_plus") return 4;
  return -1;
}

std::string format_cell(double v) {
  if (std::isnan(v)) return "—";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

}  // namespace

ResultTable build_result_table(const std::vector<RunRecord>& runs) {
  ResultTable table;
  table.columns = {"Base", "DeN", "SEAL", "PLC", "CTp"};

  std::set<std::string> key_set;
  std::vector<std::pair<std::string, double>> group_keys;
  std::vector<std::string> datasets;
  for (const RunRecord& r : runs) {
    const int col = column_of(r.trainer);
    if (col < 0) throw Error("build_result_table: unknown trainer tag `" + r.trainer + "`");
    std::ostringstream key;
    key << r.dataset << '\x1f' << r.noise_method << '\x1f' << r.rate << '\x1f' << r.trainer;
    if (!key_set.insert(key.str()).second)
      throw Error("build_result_table: duplicate run for dataset=" + r.dataset + " method=" +
                  r.noise_method + " rate=" + std::to_string(r.rate) + " trainer=" + r.trainer);
    const auto gk = std::make_pair(r.noise_method, r.rate);
    if (std::find(group_keys.begin(), group_keys.end(), gk) == group_keys.end())
      group_keys.push_back(gk);
    if (std::find(datasets.begin(), datasets.end(), r.dataset) == datasets.end())
      datasets.push_back(r.dataset);
  }

  for (const auto& [method, rate] : group_keys) {
    ResultTable::Group g;
    g.noise_method = method;
    g.rate = rate;
    g.datasets = datasets;
    g.scores.assign(datasets.size(), std::vector<double>(table.columns.size(), kMissing));
    for (const RunRecord& r : runs) {
      if (r.noise_method != method || r.rate != rate) continue;
      const std::size_t row = static_cast<std::size_t>(
          std::find(datasets.begin(), datasets.end(), r.dataset) - datasets.begin());
      g.scores[row][static_cast<std::size_t>(column_of(r.trainer))] = r.macro_f1;
    }
    g.api.assign(table.columns.size(), kMissing);
    for (std::size_t col = 1; col < table.columns.size(); ++col) {
      std::vector<double> base, method_scores;
      for (std::size_t row = 0; row < datasets.size(); ++row) {
        if (std::isnan(g.scores[row][0]) || std::isnan(g.scores[row][col])) continue;
        base.push_back(g.scores[row][0]);
        method_scores.push_back(g.scores[row][col]);
      }
      if (!base.empty()) g.api[col] = recompute_api(base, method_scores);
    }
    table.groups.push_back(std::move(g));
  }
  return table;
}

std::string ResultTable::to_csv() const {
  std::ostringstream out;
  out << "noise_method,rate,dataset";
  for (const std::string& c : columns) out << ',' << c;
  out << '\n';
  for (const Group& g : groups) {
    for (std::size_t row = 0; row < g.datasets.size(); ++row) {
      out << g.noise_method << ',' << g.rate << ',' << g.datasets[row];
      for (double v : g.scores[row]) out << ',' << (std::isnan(v) ? "" : format_cell(v));
      out << '\n';
    }
    out << g.noise_method << ',' << g.rate << ",API";
    for (std::size_t col = 0; col < columns.size(); ++col) {
      out << ',';
      if (!std::isnan(g.api[col])) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.1f%%", g.api[col]);
        out << buf;
      }
    }
    out << '\n';
  }
  return out.str();
}

std::string ResultTable::to_text() const {
  // Display width differs from byte size for the missing-cell glyph.
  auto pad = [](const std::string& s, std::size_t display, std::size_t width) {
    return s + std::string(width > display ? width - display : 1, ' ');
  };
  auto pad_ascii = [&](const std::string& s, std::size_t width) { return pad(s, s.size(), width); };

  std::ostringstream out;
  std::size_t name_width = 4;
  for (const Group& g : groups)
    for (const std::string& d : g.datasets) name_width = std::max(name_width, d.size());
  name_width += 2;
  constexpr std::size_t kCell = 10;

  for (const Group& g : groups) {
    out << "== " << g.noise_method << " @ rate " << g.rate << " ==\n";
    out << pad_ascii("", name_width);
    for (const std::string& c : columns) out << pad_ascii(c, kCell);
    out << '\n';
    for (std::size_t row = 0; row < g.datasets.size(); ++row) {
      out << pad_ascii(g.datasets[row], name_width);
      for (double v : g.scores[row]) {
        const std::string cell = format_cell(v);
        out << pad(cell, std::isnan(v) ? 1 : cell.size(), kCell);
      }
      out << '\n';
    }
    out << pad_ascii("API", name_width);
    for (std::size_t col = 0; col < columns.size(); ++col) {
      if (std::isnan(g.api[col])) {
        out << pad_ascii("-", kCell);
      } else {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%+.1f%%", g.api[col]);
        out << pad_ascii(buf, kCell);
      }
    }
    out << "\n\n";
  }
  return out.str();
}

}  // namespace noisylab
