// SPDX-License-Identifier: Apache-2.0
//
// Experiment runner for product-title classification under label noise.
// Stage verbs (ingest, inject-noise, denoise, train, train-robust, eval)
// operate on corpus snapshots so pipelines can also be composed by hand;
// `suite` runs full config-driven experiments end to end.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "noisylab/denoise.hpp"
#include "noisylab/experiment.hpp"
#include "noisylab/features.hpp"
#include "noisylab/robust_train.hpp"
#include "noisylab/rng.hpp"

namespace fs = std::filesystem;
using namespace noisylab;

namespace {

struct CommonArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required = true) {
  auto* opt = cmd->add_option("--config", args.config, "experiment config file");
  if (config_required) opt->required();
  cmd->add_option("--seed", args.seed, "override the config seed");
  cmd->add_option("--out", args.out, "override the output directory");
}

ExperimentConfig load_config(const CommonArgs& args) {
  ExperimentConfig cfg = parse_config_file(args.config);
  if (args.seed) cfg.seed = *args.seed;
  if (!args.out.empty()) cfg.out_dir = args.out;
  return cfg;
}

fs::path ensure_out(const ExperimentConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  return cfg.out_dir;
}

void write_report_csv(const fs::path& path, const RunRecord& r) {
  std::string csv = "dataset,method,rate,trainer,macro_f1,seed\n";
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%s,%s,%g,%s,%.6f,%llu\n", r.dataset.c_str(),
                r.noise_method.c_str(), r.rate, r.trainer.c_str(), r.macro_f1,
                static_cast<unsigned long long>(r.seed));
  std::ofstream out(path, std::ios::binary);
  out << csv << buf;
}

RunRecord make_record(const ExperimentConfig& cfg, const std::string& trainer, double f1) {
  RunRecord r;
  r.dataset = cfg.effective_dataset_name();
  r.noise_method = cfg.noise_enabled ? to_string(cfg.noise_method) : "none";
  r.rate = cfg.noise_enabled ? cfg.noise_rate : 0.0;
  r.trainer = trainer;
  r.macro_f1 = f1;
  r.seed = cfg.seed;
  return r;
}

int cmd_ingest(const CommonArgs& args) {
  ExperimentConfig cfg = load_config(args);
  const fs::path dir = ensure_out(cfg);
  Corpus raw = load_corpus(cfg.dataset_path, CsvFormat{cfg.delimiter});
  Corpus filtered = filter_rare_labels(raw, cfg.min_count);
  Corpus corpus = stratified_split(filtered, cfg.test_fraction, cfg.seed);
  write_snapshot(corpus, dir / "corpus.jsonl");
  const SkewReport skew = kl_skewness(corpus, Split::train);
  std::cout << "classes " << corpus.num_labels() << "  train " << corpus.count_split(Split::train)
            << "  test " << corpus.count_split(Split::test) << "  KL " << skew.kl_divergence
            << "\nwrote " << (dir / "corpus.jsonl").string() << "\n";
  return 0;
}

int cmd_inject_noise(const CommonArgs& args, const std::string& corpus_path) {
  ExperimentConfig cfg = load_config(args);
  if (!cfg.noise_enabled) throw Error("config has noise.method = none");
  const fs::path dir = ensure_out(cfg);
  Corpus corpus = read_snapshot(corpus_path);

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
      const TrainResult clean = train(corpus, spec.params.train, nullptr, false);
      result = last_epoch_idn(corpus, clean.model, spec);
      break;
    }
    case NoiseMethod::multi_epoch: {
      const TrainResult clean = train(corpus, spec.params.train);
      result = multi_epoch_idn(corpus, clean.checkpoints, spec);
      break;
    }
    case NoiseMethod::multi_model:
      result = multi_model_idn(corpus, spec);
      break;
    case NoiseMethod::similarity: {
      std::vector<std::string> titles;
      for (const Item& it : corpus.items())
        if (it.split == Split::train) titles.push_back(it.title);
      const TfIdfModel tfidf = TfIdfModel::fit(titles);
      std::optional<EmbeddingTable> emb;
      if (!cfg.embeddings_path.empty()) emb = EmbeddingTable::load_jsonl(cfg.embeddings_path);
      result = similarity_idn(corpus, tfidf, emb ? &*emb : nullptr, spec);
      break;
    }
  }
  write_flip_manifest(result, dir / "flip_manifest.jsonl");
  write_snapshot(result.corpus, dir / "corpus_noisy.jsonl");
  const NoiseMeasure measure = measure_noise(result);
  std::cout << "flipped " << result.flips.size() << " items, rate " << measure.achieved_rate
            << "\nwrote " << (dir / "corpus_noisy.jsonl").string() << " and flip_manifest.jsonl\n";
  return 0;
}

int cmd_train(const CommonArgs& args, const std::string& corpus_path) {
  ExperimentConfig cfg = load_config(args);
  const fs::path dir = ensure_out(cfg);
  Corpus corpus = read_snapshot(corpus_path);
  const TrainResult res = train(corpus, cfg.train);
  res.model.save(dir / "model.bin");
  const EvalReport report = evaluate_on_split(corpus, res.model, Split::test);
  write_report_csv(dir / "report.csv", make_record(cfg, "base", report.macro_f1));
  std::cout << "test macro F1 " << report.macro_f1 << "\nwrote " << (dir / "model.bin").string()
            << " and report.csv\n";
  return 0;
}

int cmd_denoise(const CommonArgs& args, const std::string& corpus_path,
                const std::string& model_path, const std::string& manifest_path) {
  ExperimentConfig cfg = load_config(args);
  const fs::path dir = ensure_out(cfg);
  Corpus corpus = read_snapshot(corpus_path);

  SoftmaxClassifier model;
  if (!model_path.empty()) {
    model = SoftmaxClassifier::load(model_path);
  } else {
    model = train(corpus, cfg.train, nullptr, false).model;
  }
  FlipManifest manifest;
  if (!manifest_path.empty()) manifest = read_flip_manifest(manifest_path);

  const DenoiseOutcome outcome = denoise(corpus, model, cfg.denoise_threshold,
                                         manifest_path.empty() ? nullptr : &manifest);
  write_denoise_audit(outcome.audit, dir / "denoise_audit.jsonl");
  write_snapshot(outcome.corpus, dir / "corpus_denoised.jsonl");
  for (int k : outcome.report.emptied_classes)
    std::cerr << "warning: denoising emptied train class `"
              << corpus.labels()[static_cast<std::size_t>(k)] << "`\n";
  std::cout << "relabeled " << outcome.report.relabeled << ", removed " << outcome.report.removed
            << ", kept " << outcome.report.kept_unchanged << ", data reduction "
            << outcome.report.data_reduction;
  if (outcome.report.noise_reduction)
    std::cout << ", noise reduction " << *outcome.report.noise_reduction;
  std::cout << "\nwrote " << (dir / "corpus_denoised.jsonl").string() << "\n";
  return 0;
}

int cmd_train_robust(const CommonArgs& args, const std::string& corpus_path) {
  ExperimentConfig cfg = load_config(args);
  const fs::path dir = ensure_out(cfg);
  Corpus corpus = read_snapshot(corpus_path);

  SoftmaxClassifier model;
  if (cfg.trainer == "seal") {
    SealConfig sc;
    sc.iterations = cfg.seal_iterations;
    sc.train = cfg.train;
    const SealResult res = train_seal(corpus, sc);
    model = res.model;
  } else if (cfg.trainer == "plc") {
    PlcConfig pc;
    pc.warmup_epochs = cfg.plc_warmup_epochs;
    pc.theta0 = cfg.plc_theta0;
    pc.threshold_step = cfg.plc_threshold_step;
    pc.theta_floor = cfg.plc_floor;
    pc.train = cfg.train;
    const PlcResult res = train_plc(corpus, pc);
    write_plc_corrections(res.corrections, dir / "plc_corrections.jsonl");
    model = res.model;
  } else if (cfg.trainer == "coteaching_plus") {
    CtpConfig cc;
    cc.estimated_noise_rate =
        cfg.ctp_tau >= 0.0 ? cfg.ctp_tau : (cfg.noise_enabled ? cfg.noise_rate : 0.0);
    cc.ramp_epochs = cfg.ctp_ramp_epochs;
    cc.train = cfg.train;
    cc.second_seed = cfg.train.seed + cfg.ctp_second_seed_offset;
    const CtpResult res = train_coteaching_plus(corpus, cc);
    write_ctp_selections(res.selections, dir / "ctp_selections.jsonl");
    model = res.model_a;
  } else {
    throw Error("trainer `" + cfg.trainer + "` is not a robust trainer; use seal, plc or coteaching_plus");
  }
  model.save(dir / "model.bin");
  const EvalReport report = evaluate_on_split(corpus, model, Split::test);
  write_report_csv(dir / "report.csv", make_record(cfg, cfg.trainer, report.macro_f1));
  std::cout << "test macro F1 " << report.macro_f1 << "\nwrote " << (dir / "model.bin").string()
            << " and report.csv\n";
  return 0;
}

int cmd_eval(const CommonArgs& args, const std::string& corpus_path,
             const std::string& model_path) {
  ExperimentConfig cfg = load_config(args);
  const fs::path dir = ensure_out(cfg);
  Corpus corpus = read_snapshot(corpus_path);
  const SoftmaxClassifier model = SoftmaxClassifier::load(model_path);
  const EvalReport report = evaluate_on_split(corpus, model, Split::test);
  write_report_csv(dir / "report.csv", make_record(cfg, cfg.trainer, report.macro_f1));
  std::cout << "test macro F1 " << report.macro_f1 << "\nwrote "
            << (dir / "report.csv").string() << "\n";
  return 0;
}

int cmd_suite(const CommonArgs& args) {
  SuiteSpec spec = parse_suite_file(args.config);
  if (args.seed) spec.base.seed = *args.seed;
  std::optional<fs::path> out;
  if (!args.out.empty()) out = args.out;
  const SuiteOutcome outcome = run_suite(spec, out);
  std::cout << outcome.table.to_text();
  std::cout << "ran " << outcome.records.size() << " cell(s), " << outcome.failures.size()
            << " failure(s)\nwrote tables under " << outcome.dir.string() << "\n";
  for (const auto& [cell, msg] : outcome.failures)
    std::cerr << "cell " << cell << " failed: " << msg << "\n";
  return outcome.failures.empty() ? 0 : 3;
}

int cmd_report(const std::vector<std::string>& runs, const std::string& out) {
  std::vector<fs::path> roots(runs.begin(), runs.end());
  const std::vector<RunRecord> records = read_run_records(roots);
  if (records.empty()) throw Error("no report.csv files found under the given paths");
  const ResultTable table = build_result_table(records);
  std::cout << table.to_text();
  if (!out.empty()) {
    fs::create_directories(out);
    std::ofstream csv(fs::path(out) / "result_table.csv", std::ios::binary);
    csv << table.to_csv();
    std::ofstream txt(fs::path(out) / "result_table.txt", std::ios::binary);
    txt << table.to_text();
    std::cout << "wrote tables under " << out << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"product title classification lab: label-noise simulation, denoising and robust training"};
  app.require_subcommand(1);

  CommonArgs ingest_args, noise_args, train_args, denoise_args, robust_args, eval_args, suite_args;
  std::string corpus_path, model_path, manifest_path, report_out;
  std::vector<std::string> report_runs;

  auto* ingest = app.add_subcommand("ingest", "load, filter and split a dataset");
  add_common(ingest, ingest_args);

  auto* inject = app.add_subcommand("inject-noise", "corrupt train labels of a clean snapshot");
  add_common(inject, noise_args);
  inject->add_option("--corpus", corpus_path, "corpus snapshot (jsonl)")->required();

  auto* train_cmd = app.add_subcommand("train", "train the base classifier on a snapshot");
  add_common(train_cmd, train_args);
  train_cmd->add_option("--corpus", corpus_path, "corpus snapshot (jsonl)")->required();

  auto* denoise_cmd = app.add_subcommand("denoise", "relabel/remove uncertain train items");
  add_common(denoise_cmd, denoise_args);
  denoise_cmd->add_option("--corpus", corpus_path, "corpus snapshot (jsonl)")->required();
  denoise_cmd->add_option("--model", model_path, "pre-trained model (default: train one)");
  denoise_cmd->add_option("--manifest", manifest_path, "flip manifest for noise accounting");

  auto* robust = app.add_subcommand("train-robust", "train with seal, plc or coteaching_plus");
  add_common(robust, robust_args);
  robust->add_option("--corpus", corpus_path, "corpus snapshot (jsonl)")->required();

  auto* eval_cmd = app.add_subcommand("eval", "evaluate a saved model on the test split");
  add_common(eval_cmd, eval_args);
  eval_cmd->add_option("--corpus", corpus_path, "corpus snapshot (jsonl)")->required();
  eval_cmd->add_option("--model", model_path, "model file")->required();

  auto* suite = app.add_subcommand("suite", "run a config grid and build result tables");
  add_common(suite, suite_args);

  auto* report = app.add_subcommand("report", "assemble result tables from run directories");
  report->add_option("--runs", report_runs, "run directories or report.csv files")->required();
  report->add_option("--out", report_out, "directory for the assembled tables");

  CLI11_PARSE(app, argc, argv);

  try {
    if (ingest->parsed()) return cmd_ingest(ingest_args);
    if (inject->parsed()) return cmd_inject_noise(noise_args, corpus_path);
    if (train_cmd->parsed()) return cmd_train(train_args, corpus_path);
    if (denoise_cmd->parsed()) return cmd_denoise(denoise_args, corpus_path, model_path, manifest_path);
    if (robust->parsed()) return cmd_train_robust(robust_args, corpus_path);
    if (eval_cmd->parsed()) return cmd_eval(eval_args, corpus_path, model_path);
    if (suite->parsed()) return cmd_suite(suite_args);
    if (report->parsed()) return cmd_report(report_runs, report_out);
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
