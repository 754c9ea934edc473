// SPDX-License-Identifier: Apache-2.0
#include "noisylab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "noisylab/denoise.hpp"
#include "noisylab/features.hpp"
#include "noisylab/rng.hpp"
#include "noisylab/robust_train.hpp"
#include "json.hpp"

namespace noisylab {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw Error("config key " + key + ": expected a boolean, got `" + value + "`");
}

long long parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw Error("config key " + key + ": expected an integer, got `" + value + "`");
  }
}

std::uint64_t parse_uint(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(value, &pos);
    if (pos != value.size() || value.front() == '-') throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw Error("config key " + key + ": expected a non-negative integer, got `" + value + "`");
  }
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw Error("config key " + key + ": expected a number, got `" + value + "`");
  }
}

std::string format_double(double v) {
  std::ostringstream out;
  out << v;
  return out.str();
}

}  // namespace

void ExperimentConfig::apply(const std::string& key, const std::string& value) {
  if (key == "dataset") dataset_path = value;
  else if (key == "dataset_name") dataset_name = value;
  else if (key == "delimiter") {
    if (value == "comma") delimiter = ',';
    else if (value == "tab") delimiter = '\t';
    else throw Error("config key delimiter: expected comma or tab, got `" + value + "`");
  } else if (key == "min_count") min_count = static_cast<std::size_t>(parse_int(key, value));
  else if (key == "test_fraction") test_fraction = parse_double(key, value);
  else if (key == "seed") seed = parse_uint(key, value);
  else if (key == "noise.method") {
    if (value == "none") noise_enabled = false;
    else {
      noise_enabled = true;
      noise_method = noise_method_from_string(value);
    }
  } else if (key == "noise.rate") noise_rate = parse_double(key, value);
  else if (key == "noise.model_count") noise_model_count = static_cast<int>(parse_int(key, value));
  else if (key == "noise.similarity_cap") similarity_cap = static_cast<std::size_t>(parse_int(key, value));
  else if (key == "noise.embeddings") embeddings_path = value;
  else if (key == "denoise.enabled") denoise_enabled = parse_bool(key, value);
  else if (key == "denoise.threshold") denoise_threshold = parse_double(key, value);
  else if (key == "trainer") {
    if (value != "base" && value != "seal" && value != "plc" && value != "coteaching_plus")
      throw Error("config key trainer: unknown trainer `" + value + "`");
    trainer = value;
  } else if (key == "train.epochs") train.epochs = static_cast<int>(parse_int(key, value));
  else if (key == "train.batch_size") train.batch_size = static_cast<int>(parse_int(key, value));
  else if (key == "train.learning_rate") train.learning_rate = parse_double(key, value);
  else if (key == "train.clip_norm") train.gradient_clip_norm = parse_double(key, value);
  else if (key == "train.hidden_size") train.hidden_size = static_cast<int>(parse_int(key, value));
  else if (key == "train.hash_bits") train.features.hash_bits = static_cast<int>(parse_int(key, value));
  else if (key == "train.max_ngram") train.features.max_ngram = static_cast<int>(parse_int(key, value));
  else if (key == "seal.iterations") seal_iterations = static_cast<int>(parse_int(key, value));
  else if (key == "plc.warmup_epochs") plc_warmup_epochs = static_cast<int>(parse_int(key, value));
  else if (key == "plc.theta0") plc_theta0 = parse_double(key, value);
  else if (key == "plc.threshold_step") plc_threshold_step = parse_double(key, value);
  else if (key == "plc.floor") plc_floor = parse_double(key, value);
  else if (key == "ctp.tau") ctp_tau = parse_double(key, value);
  else if (key == "ctp.ramp_epochs") ctp_ramp_epochs = static_cast<int>(parse_int(key, value));
  else if (key == "ctp.second_seed_offset")
    ctp_second_seed_offset = parse_uint(key, value);
  else if (key == "out") out_dir = value;
  else throw Error("unknown config key `" + key + "`");
}

std::string ExperimentConfig::effective_dataset_name() const {
  return dataset_name.empty() ? dataset_path.stem().string() : dataset_name;
}

std::string ExperimentConfig::canonical_text() const {
  std::ostringstream out;
  out << "dataset = " << dataset_path.string() << '\n';
  out << "dataset_name = " << effective_dataset_name() << '\n';
  out << "delimiter = " << (delimiter == '\t' ? "tab" : "comma") << '\n';
  out << "min_count = " << min_count << '\n';
  out << "test_fraction = " << format_double(test_fraction) << '\n';
  out << "seed = " << seed << '\n';
  out << "noise.method = " << (noise_enabled ? to_string(noise_method) : "none") << '\n';
  out << "noise.rate = " << format_double(noise_rate) << '\n';
  out << "noise.model_count = " << noise_model_count << '\n';
  out << "noise.similarity_cap = " << similarity_cap << '\n';
  out << "noise.embeddings = " << embeddings_path.string() << '\n';
  out << "denoise.enabled = " << (denoise_enabled ? "true" : "false") << '\n';
  out << "denoise.threshold = " << format_double(denoise_threshold) << '\n';
  out << "trainer = " << trainer << '\n';
  out << "train.epochs = " << train.epochs << '\n';
  out << "train.batch_size = " << train.batch_size << '\n';
  out << "train.learning_rate = " << format_double(train.learning_rate) << '\n';
  out << "train.clip_norm = " << format_double(train.gradient_clip_norm) << '\n';
  out << "train.hidden_size = " << train.hidden_size << '\n';
  out << "train.hash_bits = " << train.features.hash_bits << '\n';
  out << "train.max_ngram = " << train.features.max_ngram << '\n';
  out << "seal.iterations = " << seal_iterations << '\n';
  out << "plc.warmup_epochs = " << plc_warmup_epochs << '\n';
  out << "plc.theta0 = " << format_double(plc_theta0) << '\n';
  out << "plc.threshold_step = " << format_double(plc_threshold_step) << '\n';
  out << "plc.floor = " << format_double(plc_floor) << '\n';
  out << "ctp.tau = " << format_double(ctp_tau) << '\n';
  out << "ctp.ramp_epochs = " << ctp_ramp_epochs << '\n';
  out << "ctp.second_seed_offset = " << ctp_second_seed_offset << '\n';
  out << "out = " << out_dir.string() << '\n';
  return out.str();
}

std::uint64_t ExperimentConfig::config_hash() const { return rng::fnv1a64(canonical_text()); }

void ExperimentConfig::validate() const {
  if (dataset_path.empty()) throw Error("config: dataset path is required");
  if (noise_enabled && !(noise_rate > 0.0 && noise_rate < 1.0))
    throw Error("config: noise.rate must be in (0, 1) when noise is enabled");
  train.validate();
}

namespace {

void parse_kv_lines(std::istream& in, const std::filesystem::path& path,
                    ExperimentConfig* base, std::vector<SuiteCell>* cells) {
  std::string line;
  std::size_t line_no = 0;
  SuiteCell* current = nullptr;
  while (std::getline(in, line)) {
    line_no++;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (cells == nullptr)
        throw Error(path.string() + ":" + std::to_string(line_no) +
                    ": cell sections are only valid in suite files");
      if (line.back() != ']')
        throw Error(path.string() + ":" + std::to_string(line_no) + ": unterminated section");
      std::string name = trim(line.substr(1, line.size() - 2));
      if (name.rfind("cell", 0) == 0) name = trim(name.substr(4));
      if (name.empty())
        throw Error(path.string() + ":" + std::to_string(line_no) + ": cell needs a name");
      cells->push_back({name, {}});
      current = &cells->back();
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(path.string() + ":" + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (current != nullptr) {
        ExperimentConfig probe;  // validate the key/value pair eagerly
        probe.apply(key, value);
        current->overrides.emplace_back(key, value);
      } else {
        base->apply(key, value);
      }
    } catch (const Error& e) {
      throw Error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

}  // namespace

ExperimentConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config " + path.string());
  ExperimentConfig cfg;
  parse_kv_lines(in, path, &cfg, nullptr);
  return cfg;
}

SuiteSpec parse_suite_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open suite " + path.string());
  SuiteSpec spec;
  parse_kv_lines(in, path, &spec.base, &spec.cells);
  return spec;
}

namespace {

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

std::string report_csv_line(const RunRecord& r) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%s,%s,%g,%s,%.6f,%llu", r.dataset.c_str(),
                r.noise_method.c_str(), r.rate, r.trainer.c_str(), r.macro_f1,
                static_cast<unsigned long long>(r.seed));
  return buf;
}

nlohmann::ordered_json eval_to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["macro_f1"] = report.macro_f1;
  j["per_class_f1"] = report.per_class_f1;
  j["support"] = report.support;
  j["fingerprint"] = report.config_fingerprint;
  return j;
}

}  // namespace

RunOutcome run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::filesystem::path dir = cfg.out_dir;
  std::filesystem::create_directories(dir);

  std::vector<std::string> stages;
  std::vector<std::string> true_label_access;
  std::vector<std::string> artifacts;
  auto artifact = [&](const std::string& name) { artifacts.push_back(name); };

  auto run_stage = [&](const std::string& name, auto&& body) {
    try {
      body();
      stages.push_back(name);
    } catch (const Error& e) {
      throw StageError(name, e.what());
    } catch (const std::exception& e) {
      throw StageError(name, e.what());
    }
  };

  Corpus working;
  run_stage("ingest", [&] {
    Corpus raw = load_corpus(cfg.dataset_path, CsvFormat{cfg.delimiter});
    Corpus filtered = filter_rare_labels(raw, cfg.min_count);
    working = stratified_split(filtered, cfg.test_fraction, cfg.seed);
    write_snapshot(working, dir / "corpus_clean.jsonl");
    artifact("corpus_clean.jsonl");
    const SkewReport skew = kl_skewness(working, Split::train);
    nlohmann::ordered_json j;
    j["classes"] = working.num_labels();
    j["train"] = working.count_split(Split::train);
    j["test"] = working.count_split(Split::test);
    j["kl"] = skew.kl_divergence;
    j["per_class_train_counts"] = skew.per_class_counts;
    write_text_file(dir / "corpus_stats.json", j.dump(2) + "\n");
    artifact("corpus_stats.json");
  });

  FlipManifest manifest;
  if (cfg.noise_enabled) {
    run_stage("noise", [&] {
      NoiseSpec spec;
      spec.method = cfg.noise_method;
      spec.rate = cfg.noise_rate;
      spec.seed = rng::chain(cfg.seed, rng::fnv1a64("noise"));
      spec.params.model_count = cfg.noise_model_count;
      spec.params.similarity_cap = cfg.similarity_cap;
      spec.params.train = cfg.train;
      spec.params.train.seed = rng::chain(cfg.seed, rng::fnv1a64("noise_clean_model"));

      NoiseResult result;
      switch (cfg.noise_method) {
        case NoiseMethod::last_epoch: {
          const TrainResult clean =
              train(working, spec.params.train, nullptr, /*record_checkpoints=*/false);
          result = last_epoch_idn(working, clean.model, spec);
          break;
        }
        case NoiseMethod::multi_epoch: {
          const TrainResult clean = train(working, spec.params.train);
          result = multi_epoch_idn(working, clean.checkpoints, spec);
          break;
        }
        case NoiseMethod::multi_model:
          result = multi_model_idn(working, spec);
          break;
        case NoiseMethod::similarity: {
          std::vector<std::string> titles;
          for (const Item& it : working.items())
            if (it.split == Split::train) titles.push_back(it.title);
          const TfIdfModel tfidf = TfIdfModel::fit(titles);
          std::optional<EmbeddingTable> emb;
          if (!cfg.embeddings_path.empty())
            emb = EmbeddingTable::load_jsonl(cfg.embeddings_path);
          result = similarity_idn(working, tfidf, emb ? &*emb : nullptr, spec);
          break;
        }
      }
      write_flip_manifest(result, dir / "flip_manifest.jsonl");
      artifact("flip_manifest.jsonl");
      write_snapshot(result.corpus, dir / "corpus_noisy.jsonl");
      artifact("corpus_noisy.jsonl");
      working = std::move(result.corpus);
      for (const auto& [id, entry] : result.flips)
        manifest[id] = ManifestEntry{entry.old_label, entry.new_label, entry.score};
      true_label_access.push_back("noise");
    });
  }

  if (cfg.denoise_enabled) {
    run_stage("denoise", [&] {
      const TrainResult denoiser = train(working, cfg.train, nullptr, /*record_checkpoints=*/false);
      const FlipManifest* m = cfg.noise_enabled ? &manifest : nullptr;
      DenoiseOutcome outcome = denoise(working, denoiser.model, cfg.denoise_threshold, m);
      write_denoise_audit(outcome.audit, dir / "denoise_audit.jsonl");
      artifact("denoise_audit.jsonl");
      nlohmann::ordered_json j;
      j["relabeled"] = outcome.report.relabeled;
      j["removed"] = outcome.report.removed;
      j["kept_unchanged"] = outcome.report.kept_unchanged;
      j["data_reduction"] = outcome.report.data_reduction;
      if (outcome.report.noise_reduction)
        j["noise_reduction"] = *outcome.report.noise_reduction;
      j["emptied_classes"] = outcome.report.emptied_classes;
      write_text_file(dir / "denoise_report.json", j.dump(2) + "\n");
      artifact("denoise_report.json");
      write_snapshot(outcome.corpus, dir / "corpus_denoised.jsonl");
      artifact("corpus_denoised.jsonl");
      for (int k : outcome.report.emptied_classes)
        std::cerr << "warning: denoising emptied train class `" << working.labels()[static_cast<std::size_t>(k)]
                  << "`\n";
      working = std::move(outcome.corpus);
      if (m != nullptr) true_label_access.push_back("denoise_report");
    });
  }

  SoftmaxClassifier model;
  run_stage("train", [&] {
    if (cfg.trainer == "base") {
      const TrainResult res = train(working, cfg.train);
      model = res.model;
      nlohmann::ordered_json j;
      j["epoch_mean_loss"] = res.log.epoch_mean_loss;
      write_text_file(dir / "train_log.json", j.dump(2) + "\n");
      artifact("train_log.json");
    } else if (cfg.trainer == "seal") {
      SealConfig sc;
      sc.iterations = cfg.seal_iterations;
      sc.train = cfg.train;
      const SealResult res = train_seal(working, sc);
      model = res.model;
      nlohmann::ordered_json j = nlohmann::ordered_json::array();
      for (const EvalReport& r : res.per_iteration) j.push_back(eval_to_json(r));
      write_text_file(dir / "seal_log.json", j.dump(2) + "\n");
      artifact("seal_log.json");
    } else if (cfg.trainer == "plc") {
      PlcConfig pc;
      pc.warmup_epochs = cfg.plc_warmup_epochs;
      pc.theta0 = cfg.plc_theta0;
      pc.threshold_step = cfg.plc_threshold_step;
      pc.theta_floor = cfg.plc_floor;
      pc.train = cfg.train;
      const PlcResult res = train_plc(working, pc);
      model = res.model;
      write_plc_corrections(res.corrections, dir / "plc_corrections.jsonl");
      artifact("plc_corrections.jsonl");
    } else if (cfg.trainer == "coteaching_plus") {
      CtpConfig cc;
      cc.estimated_noise_rate =
          cfg.ctp_tau >= 0.0 ? cfg.ctp_tau : (cfg.noise_enabled ? cfg.noise_rate : 0.0);
      cc.ramp_epochs = cfg.ctp_ramp_epochs;
      cc.train = cfg.train;
      cc.second_seed = cfg.train.seed + cfg.ctp_second_seed_offset;
      const CtpResult res = train_coteaching_plus(working, cc);
      model = res.model_a;
      write_ctp_selections(res.selections, dir / "ctp_selections.jsonl");
      artifact("ctp_selections.jsonl");
    } else {
      throw Error("unknown trainer `" + cfg.trainer + "`");
    }
    model.save(dir / "model.bin");
    artifact("model.bin");
  });

  RunOutcome outcome;
  run_stage("eval", [&] {
    outcome.eval = evaluate_on_split(working, model, Split::test);
    true_label_access.push_back("test_eval");
    outcome.record.dataset = cfg.effective_dataset_name();
    outcome.record.noise_method = cfg.noise_enabled ? to_string(cfg.noise_method) : "none";
    outcome.record.rate = cfg.noise_enabled ? cfg.noise_rate : 0.0;
    outcome.record.trainer =
        cfg.denoise_enabled && cfg.trainer == "base" ? "den" : cfg.trainer;
    outcome.record.macro_f1 = outcome.eval.macro_f1;
    outcome.record.seed = cfg.seed;
    std::string csv = "dataset,method,rate,trainer,macro_f1,seed\n";
    csv += report_csv_line(outcome.record) + "\n";
    write_text_file(dir / "report.csv", csv);
    artifact("report.csv");
    write_text_file(dir / "eval_report.json", eval_to_json(outcome.eval).dump(2) + "\n");
    artifact("eval_report.json");
  });

  char hash_hex[32];
  std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                static_cast<unsigned long long>(cfg.config_hash()));
  nlohmann::ordered_json manifest_json;
  manifest_json["config_hash"] = hash_hex;
  manifest_json["seed"] = cfg.seed;
  manifest_json["stages"] = stages;
  manifest_json["true_label_access"] = true_label_access;
  manifest_json["artifacts"] = artifacts;
  manifest_json["config_text"] = cfg.canonical_text();
  write_text_file(dir / "manifest.json", manifest_json.dump(2) + "\n");

  outcome.dir = dir;
  return outcome;
}

SuiteOutcome run_suite(const SuiteSpec& spec,
                       const std::optional<std::filesystem::path>& out_override) {
  SuiteOutcome outcome;
  outcome.dir = out_override.value_or(spec.base.out_dir);
  std::filesystem::create_directories(outcome.dir);

  std::vector<SuiteCell> cells = spec.cells;
  if (cells.empty()) cells.push_back({"run", {}});

  for (const SuiteCell& cell : cells) {
    ExperimentConfig cfg = spec.base;
    bool seed_overridden = false;
    for (const auto& [key, value] : cell.overrides) {
      cfg.apply(key, value);
      if (key == "seed") seed_overridden = true;
    }
    if (!seed_overridden) cfg.seed = rng::chain(spec.base.seed, rng::fnv1a64(cell.name));
    cfg.out_dir = outcome.dir / "cells" / cell.name;
    try {
      outcome.records.push_back(run_experiment(cfg).record);
    } catch (const StageError& e) {
      outcome.failures.emplace_back(cell.name, e.what());
    } catch (const std::exception& e) {
      outcome.failures.emplace_back(cell.name, e.what());
    }
  }

  std::string runs_csv = "dataset,method,rate,trainer,macro_f1,seed\n";
  for (const RunRecord& r : outcome.records) runs_csv += report_csv_line(r) + "\n";
  write_text_file(outcome.dir / "runs.csv", runs_csv);

  outcome.table = build_result_table(outcome.records);
  write_text_file(outcome.dir / "result_table.csv", outcome.table.to_csv());
  write_text_file(outcome.dir / "result_table.txt", outcome.table.to_text());

  nlohmann::ordered_json api;
  for (const auto& g : outcome.table.groups) {
    nlohmann::ordered_json entry;
    for (std::size_t col = 1; col < outcome.table.columns.size(); ++col)
      if (!std::isnan(g.api[col])) entry[outcome.table.columns[col]] = g.api[col];
    api[g.noise_method + "@" + format_double(g.rate)] = entry;
  }
  write_text_file(outcome.dir / "api_summary.json", api.dump(2) + "\n");

  if (!outcome.failures.empty()) {
    nlohmann::ordered_json fail;
    for (const auto& [cell, msg] : outcome.failures) fail[cell] = msg;
    write_text_file(outcome.dir / "failures.json", fail.dump(2) + "\n");
  }
  return outcome;
}

std::vector<RunRecord> read_run_records(const std::vector<std::filesystem::path>& roots) {
  std::vector<std::filesystem::path> files;
  for (const auto& root : roots) {
    if (std::filesystem::is_regular_file(root)) {
      files.push_back(root);
      continue;
    }
    if (!std::filesystem::is_directory(root)) throw Error("no such path: " + root.string());
    for (const auto& entry : std::filesystem::recursive_directory_iterator(root))
      if (entry.is_regular_file() && entry.path().filename() == "report.csv")
        files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  std::vector<RunRecord> records;
  for (const auto& file : files) {
    std::ifstream in(file);
    if (!in) throw Error("cannot open " + file.string());
    std::string line;
    if (!std::getline(in, line)) throw Error(file.string() + " is empty");
    if (trim(line) != "dataset,method,rate,trainer,macro_f1,seed")
      throw Error(file.string() + ": unexpected report header");
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      std::istringstream fields(line);
      RunRecord r;
      std::string rate, f1, seed;
      if (!std::getline(fields, r.dataset, ',') || !std::getline(fields, r.noise_method, ',') ||
          !std::getline(fields, rate, ',') || !std::getline(fields, r.trainer, ',') ||
          !std::getline(fields, f1, ',') || !std::getline(fields, seed, ','))
        throw Error(file.string() + ": malformed row `" + line + "`");
      r.rate = parse_double("rate", rate);
      r.macro_f1 = parse_double("macro_f1", f1);
      r.seed = parse_uint("seed", seed);
      records.push_back(std::move(r));
    }
  }
  return records;
}

}  // namespace noisylab
