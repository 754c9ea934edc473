// SPDX-License-Identifier: Apache-2.0
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "noisylab/denoise.hpp"
#include "noisylab/experiment.hpp"
#include "noisylab/features.hpp"
#include "noisylab/robust_train.hpp"

namespace py = pybind11;
using namespace noisylab;

namespace {

// Builds an in-memory corpus from (title, label) pairs; everything lands in
// the train split unless ids are tagged later via stratified_split.
Corpus corpus_from_rows(const std::vector<std::pair<std::string, std::string>>& rows,
                        const std::string& source) {
  std::vector<Item> items;
  std::vector<std::string> labels;
  std::unordered_map<std::string, int> index;
  std::int64_t next_id = 0;
  for (const auto& [title, label] : rows) {
    auto [it, inserted] = index.try_emplace(label, static_cast<int>(labels.size()));
    if (inserted) labels.push_back(label);
    Item item;
    item.id = next_id++;
    item.title = title;
    item.true_label = item.observed_label = it->second;
    items.push_back(std::move(item));
  }
  return Corpus(std::move(items), std::move(labels), source);
}

NoiseSpec make_spec(NoiseMethod method, double rate, std::uint64_t seed, const TrainConfig& train,
                    int model_count) {
  NoiseSpec spec;
  spec.method = method;
  spec.rate = rate;
  spec.seed = seed;
  spec.params.train = train;
  spec.params.model_count = model_count;
  return spec;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "product title classification lab: noise simulation, denoising, robust training";

  py::enum_<Split>(m, "Split").value("train", Split::train).value("test", Split::test);

  py::class_<Item>(m, "Item")
      .def_readonly("id", &Item::id)
      .def_readonly("title", &Item::title)
      .def_readonly("true_label", &Item::true_label)
      .def_readonly("observed_label", &Item::observed_label)
      .def_readonly("split", &Item::split);

  py::class_<Corpus>(m, "Corpus")
      .def_static("from_rows", &corpus_from_rows, py::arg("rows"), py::arg("source") = "memory")
      .def_property_readonly("labels", &Corpus::labels)
      .def_property_readonly("items", &Corpus::items)
      .def("__len__", &Corpus::size)
      .def("count_split", &Corpus::count_split);

  m.def("load_corpus",
        [](const std::filesystem::path& path, char delimiter) {
          return load_corpus(path, CsvFormat{delimiter});
        },
        py::arg("path"), py::arg("delimiter") = ',');
  m.def("filter_rare_labels", &filter_rare_labels, py::arg("corpus"), py::arg("min_count") = 10);
  m.def("stratified_split", &stratified_split, py::arg("corpus"), py::arg("test_fraction"),
        py::arg("seed"));
  m.def("kl_skewness",
        [](const Corpus& c, Split split) {
          const SkewReport r = kl_skewness(c, split);
          return py::make_tuple(r.kl_divergence, r.per_class_counts);
        },
        py::arg("corpus"), py::arg("split") = Split::train);

  m.def("tokenize", [](const std::string& s) { return tokenize(s); });

  py::class_<SparseVector>(m, "SparseVector")
      .def_readonly("entries", &SparseVector::entries)
      .def_readonly("dim", &SparseVector::dim)
      .def("l2_norm", &SparseVector::l2_norm);

  py::class_<TfIdfModel>(m, "TfIdfModel")
      .def_static("fit", &TfIdfModel::fit)
      .def("vectorize", [](const TfIdfModel& m_, const std::string& s) { return m_.vectorize(s); })
      .def("idf_of", [](const TfIdfModel& m_, const std::string& t) { return m_.idf_of(t); })
      .def_property_readonly("vocab_size", &TfIdfModel::vocab_size);

  m.def("cosine", py::overload_cast<const SparseVector&, const SparseVector&>(&cosine));
  m.def("cosine_dense", [](const std::vector<double>& a, const std::vector<double>& b) {
    return cosine(std::span(a), std::span(b));
  });

  py::class_<FeatureSpec>(m, "FeatureSpec")
      .def(py::init<>())
      .def_readwrite("max_ngram", &FeatureSpec::max_ngram)
      .def_readwrite("hash_bits", &FeatureSpec::hash_bits);

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("learning_rate", &TrainConfig::learning_rate)
      .def_readwrite("gradient_clip_norm", &TrainConfig::gradient_clip_norm)
      .def_readwrite("hidden_size", &TrainConfig::hidden_size)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("features", &TrainConfig::features);

  py::class_<Prediction>(m, "Prediction")
      .def_readonly("probs", &Prediction::probs)
      .def_readonly("top1", &Prediction::top1)
      .def_readonly("top2", &Prediction::top2)
      .def_readonly("confidence", &Prediction::confidence);

  py::class_<SoftmaxClassifier>(m, "SoftmaxClassifier")
      .def("predict", [](const SoftmaxClassifier& m_, const std::string& s) { return m_.predict(s); })
      .def_property_readonly("labels", &SoftmaxClassifier::labels)
      .def_property_readonly("num_classes", &SoftmaxClassifier::num_classes)
      .def("save", &SoftmaxClassifier::save)
      .def_static("load", &SoftmaxClassifier::load);

  py::class_<TrainLog>(m, "TrainLog").def_readonly("epoch_mean_loss", &TrainLog::epoch_mean_loss);

  py::class_<TrainResult>(m, "TrainResult")
      .def_readonly("model", &TrainResult::model)
      .def_readonly("checkpoints", &TrainResult::checkpoints)
      .def_readonly("log", &TrainResult::log);

  m.def("train",
        [](const Corpus& c, const TrainConfig& cfg, bool record_checkpoints) {
          return train(c, cfg, nullptr, record_checkpoints);
        },
        py::arg("corpus"), py::arg("config"), py::arg("record_checkpoints") = true,
        py::call_guard<py::gil_scoped_release>());

  m.def("batch_loss", [](const SoftmaxClassifier& m_,
                         const std::vector<std::pair<std::string, int>>& batch) {
    return loss_and_gradient(m_, batch).first;
  });
  m.def("average_predictions", [](const std::vector<const SoftmaxClassifier*>& models,
                                  const std::string& title) {
    return average_predictions(models, title);
  });

  py::enum_<NoiseMethod>(m, "NoiseMethod")
      .value("last_epoch", NoiseMethod::last_epoch)
      .value("multi_epoch", NoiseMethod::multi_epoch)
      .value("multi_model", NoiseMethod::multi_model)
      .value("similarity", NoiseMethod::similarity);

  py::class_<Flip>(m, "Flip")
      .def_readonly("old_label", &Flip::old_label)
      .def_readonly("new_label", &Flip::new_label)
      .def_readonly("score", &Flip::score);

  py::class_<NoiseResult>(m, "NoiseResult")
      .def_readonly("corpus", &NoiseResult::corpus)
      .def_readonly("flips", &NoiseResult::flips)
      .def_readonly("achieved_rate", &NoiseResult::achieved_rate);

  m.def("last_epoch_idn",
        [](const Corpus& c, const SoftmaxClassifier& m_, double rate, std::uint64_t seed) {
          NoiseSpec spec = make_spec(NoiseMethod::last_epoch, rate, seed, TrainConfig{}, 5);
          return last_epoch_idn(c, m_, spec);
        },
        py::arg("corpus"), py::arg("model"), py::arg("rate"), py::arg("seed"));
  m.def("multi_epoch_idn",
        [](const Corpus& c, const CheckpointSequence& seq, double rate, std::uint64_t seed) {
          NoiseSpec spec = make_spec(NoiseMethod::multi_epoch, rate, seed, TrainConfig{}, 5);
          return multi_epoch_idn(c, seq, spec);
        },
        py::arg("corpus"), py::arg("checkpoints"), py::arg("rate"), py::arg("seed"));
  m.def("multi_model_idn",
        [](const Corpus& c, double rate, std::uint64_t seed, const TrainConfig& train_cfg,
           int model_count) {
          NoiseSpec spec = make_spec(NoiseMethod::multi_model, rate, seed, train_cfg, model_count);
          return multi_model_idn(c, spec);
        },
        py::arg("corpus"), py::arg("rate"), py::arg("seed"), py::arg("train_config"),
        py::arg("model_count") = 5, py::call_guard<py::gil_scoped_release>());
  m.def("similarity_idn",
        [](const Corpus& c, const TfIdfModel& tfidf, double rate, std::uint64_t seed) {
          NoiseSpec spec = make_spec(NoiseMethod::similarity, rate, seed, TrainConfig{}, 5);
          return similarity_idn(c, tfidf, nullptr, spec);
        },
        py::arg("corpus"), py::arg("tfidf"), py::arg("rate"), py::arg("seed"));

  m.def("drop_words", [](const std::string& s) { return drop_words(s); });

  py::class_<DenoiseReport>(m, "DenoiseReport")
      .def_readonly("relabeled", &DenoiseReport::relabeled)
      .def_readonly("removed", &DenoiseReport::removed)
      .def_readonly("kept_unchanged", &DenoiseReport::kept_unchanged)
      .def_readonly("data_reduction", &DenoiseReport::data_reduction)
      .def_readonly("noise_reduction", &DenoiseReport::noise_reduction);

  py::class_<DenoiseOutcome>(m, "DenoiseOutcome")
      .def_readonly("corpus", &DenoiseOutcome::corpus)
      .def_readonly("report", &DenoiseOutcome::report);

  m.def("denoise",
        [](const Corpus& c, const SoftmaxClassifier& m_, double threshold) {
          return denoise(c, m_, threshold);
        },
        py::arg("corpus"), py::arg("model"), py::arg("threshold") = 0.8,
        py::call_guard<py::gil_scoped_release>());

  py::class_<EvalReport>(m, "EvalReport")
      .def_readonly("macro_f1", &EvalReport::macro_f1)
      .def_readonly("per_class_f1", &EvalReport::per_class_f1)
      .def_readonly("support", &EvalReport::support);

  m.def("macro_f1", &macro_f1, py::arg("predictions"), py::arg("gold"), py::arg("num_classes"),
        py::arg("include_zero_support") = true);
  m.def("recompute_api", &recompute_api, py::arg("base"), py::arg("method"));
  m.def("evaluate_on_split", &evaluate_on_split, py::arg("corpus"), py::arg("model"),
        py::arg("split") = Split::test);

  py::class_<SealConfig>(m, "SealConfig")
      .def(py::init<>())
      .def_readwrite("iterations", &SealConfig::iterations)
      .def_readwrite("train", &SealConfig::train);
  py::class_<SealResult>(m, "SealResult")
      .def_readonly("model", &SealResult::model)
      .def_property_readonly("per_iteration_f1", [](const SealResult& r) {
        std::vector<double> out;
        for (const auto& rep : r.per_iteration) out.push_back(rep.macro_f1);
        return out;
      });
  m.def("train_seal", &train_seal, py::call_guard<py::gil_scoped_release>());

  py::class_<PlcConfig>(m, "PlcConfig")
      .def(py::init<>())
      .def_readwrite("warmup_epochs", &PlcConfig::warmup_epochs)
      .def_readwrite("theta0", &PlcConfig::theta0)
      .def_readwrite("threshold_step", &PlcConfig::threshold_step)
      .def_readwrite("theta_floor", &PlcConfig::theta_floor)
      .def_readwrite("train", &PlcConfig::train);
  py::class_<PlcResult>(m, "PlcResult")
      .def_readonly("model", &PlcResult::model)
      .def_property_readonly("num_corrections",
                             [](const PlcResult& r) { return r.corrections.size(); });
  m.def("train_plc", &train_plc, py::call_guard<py::gil_scoped_release>());

  py::class_<CtpConfig>(m, "CtpConfig")
      .def(py::init<>())
      .def_readwrite("estimated_noise_rate", &CtpConfig::estimated_noise_rate)
      .def_readwrite("ramp_epochs", &CtpConfig::ramp_epochs)
      .def_readwrite("train", &CtpConfig::train)
      .def_readwrite("second_seed", &CtpConfig::second_seed);
  py::class_<CtpResult>(m, "CtpResult")
      .def_readonly("model_a", &CtpResult::model_a)
      .def_readonly("model_b", &CtpResult::model_b);
  m.def("train_coteaching_plus", &train_coteaching_plus,
        py::call_guard<py::gil_scoped_release>());

  m.def("run_experiment",
        [](const std::filesystem::path& config_path) {
          const ExperimentConfig cfg = parse_config_file(config_path);
          const RunOutcome outcome = run_experiment(cfg);
          return py::make_tuple(outcome.dir, outcome.eval.macro_f1);
        },
        py::arg("config_path"), py::call_guard<py::gil_scoped_release>());

  py::register_exception<Error>(m, "NoisylabError");
}
