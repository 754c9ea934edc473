// SPDX-License-Identifier: Apache-2.0
#include "noisylab/robust_train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"

namespace noisylab {

EvalReport evaluate_on_split(const Corpus& c, const SoftmaxClassifier& m, Split split) {
  std::vector<int> predictions, gold;
  for (const Item& it : c.items()) {
    if (it.split != split) continue;
    predictions.push_back(m.predict(it.title).top1);
    gold.push_back(it.true_label);
  }
  return macro_f1(predictions, gold, c.num_labels());
}

void SealConfig::validate() const {
  if (iterations < 1) throw Error("seal: iterations must be >= 1");
  train.validate();
}

SealResult train_seal(const Corpus& c, const SealConfig& cfg) {
  cfg.validate();
  SealResult result;
  SoftLabelTable next_targets;

  for (int iteration = 0; iteration < cfg.iterations; ++iteration) {
    Trainer trainer(c, cfg.train);
    if (iteration > 0) trainer.set_soft_targets(next_targets);

    SoftLabelTable accum;
    for (std::int64_t id : trainer.ids())
      accum[id].assign(static_cast<std::size_t>(trainer.model().num_classes()), 0.0);
    for (int epoch = 1; epoch <= cfg.train.epochs; ++epoch) {
      trainer.run_epoch(epoch);
      for (std::int64_t id : trainer.ids()) {
        const Prediction p = trainer.predict_item(id);
        auto& acc = accum[id];
        for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += p.probs[k];
      }
    }
    for (auto& [id, acc] : accum)
      for (double& v : acc) v /= static_cast<double>(cfg.train.epochs);

    result.soft_labels = iteration > 0 ? next_targets : SoftLabelTable{};
    next_targets = std::move(accum);
    result.model = trainer.model();
    if (c.count_split(Split::test) > 0)
      result.per_iteration.push_back(evaluate_on_split(c, result.model, Split::test));
  }
  return result;
}

void PlcConfig::validate() const {
  if (warmup_epochs < 0 || warmup_epochs >= train.epochs)
    throw Error("plc: warmup_epochs must be in [0, total epochs)");
  if (!(theta_floor <= theta0)) throw Error("plc: threshold floor must not exceed theta0");
  if (threshold_step < 0.0) throw Error("plc: threshold_step must be >= 0");
  train.validate();
}

PlcResult train_plc(const Corpus& c, const PlcConfig& cfg) {
  cfg.validate();
  PlcResult result;
  const auto hook = [&](int epoch, Trainer& trainer) {
    if (epoch <= cfg.warmup_epochs) return;
    const double theta = std::max(
        cfg.theta_floor, cfg.theta0 - cfg.threshold_step * (epoch - cfg.warmup_epochs - 1));
    for (std::int64_t id : trainer.ids()) {
      const Prediction p = trainer.predict_item(id);
      if (p.confidence < theta) continue;
      const int old_label = trainer.label(id);
      if (p.top1 == old_label) continue;
      trainer.set_label(id, p.top1);
      result.corrections.push_back({epoch, id, old_label, p.top1, p.confidence});
    }
  };
  TrainResult trained = train(c, cfg.train, hook, /*record_checkpoints=*/false);
  result.model = std::move(trained.model);
  return result;
}

void CtpConfig::validate() const {
  if (!(estimated_noise_rate >= 0.0 && estimated_noise_rate < 1.0))
    throw Error("coteaching_plus: estimated_noise_rate must be in [0, 1)");
  if (ramp_epochs < 1) throw Error("coteaching_plus: ramp_epochs must be >= 1");
  train.validate();
}

CtpResult train_coteaching_plus(const Corpus& c, const CtpConfig& cfg) {
  cfg.validate();
  TrainConfig cfg_a = cfg.train;
  TrainConfig cfg_b = cfg.train;
  cfg_b.seed = cfg.second_seed;
  Trainer a(c, cfg_a);
  Trainer b(c, cfg_b);

  CtpResult result;
  for (int epoch = 1; epoch <= cfg.train.epochs; ++epoch) {
    const double forget =
        cfg.estimated_noise_rate *
        std::min(1.0, static_cast<double>(epoch) / static_cast<double>(cfg.ramp_epochs));
    const double keep_fraction = 1.0 - forget;
    int batch_index = 0;
    for (const auto& batch : a.batches(epoch)) {
      const auto evals_a = a.evaluate(batch);
      const auto evals_b = b.evaluate(batch);

      std::vector<std::size_t> pool;
      for (std::size_t i = 0; i < batch.size(); ++i)
        if (evals_a[i].argmax != evals_b[i].argmax) pool.push_back(i);
      const bool fallback = pool.empty();
      if (fallback) {
        pool.resize(batch.size());
        for (std::size_t i = 0; i < batch.size(); ++i) pool[i] = i;
      }
      const std::size_t n_keep = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::floor(keep_fraction * static_cast<double>(pool.size()))));

      auto select = [&](const std::vector<Trainer::ItemEval>& evals, int model_tag) {
        std::vector<std::size_t> order = pool;
        std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
          if (evals[x].loss != evals[y].loss) return evals[x].loss < evals[y].loss;
          return batch[x] < batch[y];
        });
        CtpSelectionEvent event;
        event.epoch = epoch;
        event.batch = batch_index;
        event.model = model_tag;
        event.fallback = fallback;
        std::vector<bool> keep_position(batch.size(), false);
        for (std::size_t r = 0; r < order.size(); ++r) {
          const std::size_t i = order[r];
          if (r < n_keep) {
            event.selected.emplace_back(batch[i], evals[i].loss);
            keep_position[i] = true;
          } else {
            event.rejected.emplace_back(batch[i], evals[i].loss);
          }
        }
        result.selections.push_back(std::move(event));
        // the peer updates on the subset in batch order; gradient accumulation
        // stays byte-stable against the plain schedule
        std::vector<std::int64_t> ids;
        for (std::size_t i = 0; i < batch.size(); ++i)
          if (keep_position[i]) ids.push_back(batch[i]);
        return ids;
      };

      const std::vector<std::int64_t> chosen_by_a = select(evals_a, 0);
      const std::vector<std::int64_t> chosen_by_b = select(evals_b, 1);
      a.step(chosen_by_b);
      b.step(chosen_by_a);
      batch_index++;
    }
  }
  result.model_a = a.model();
  result.model_b = b.model();
  return result;
}

void write_plc_corrections(const std::vector<PlcCorrection>& log,
                           const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  for (const PlcCorrection& c : log) {
    nlohmann::ordered_json j;
    j["epoch"] = c.epoch;
    j["id"] = c.id;
    j["old"] = c.old_label;
    j["new"] = c.new_label;
    j["confidence"] = c.confidence;
    out << j.dump() << '\n';
  }
}

void write_ctp_selections(const std::vector<CtpSelectionEvent>& log,
                          const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  for (const CtpSelectionEvent& e : log) {
    nlohmann::ordered_json j;
    j["epoch"] = e.epoch;
    j["batch"] = e.batch;
    j["model"] = e.model;
    j["fallback"] = e.fallback;
    auto pairs = [](const std::vector<std::pair<std::int64_t, double>>& v) {
      nlohmann::ordered_json arr = nlohmann::ordered_json::array();
      for (const auto& [id, loss] : v) arr.push_back({{"id", id}, {"loss", loss}});
      return arr;
    };
    j["selected"] = pairs(e.selected);
    j["rejected"] = pairs(e.rejected);
    out << j.dump() << '\n';
  }
}

}  // namespace noisylab
