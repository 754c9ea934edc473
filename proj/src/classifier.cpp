// SPDX-License-Identifier: Apache-2.0
#include "noisylab/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>

#include "noisylab/features.hpp"
#include "noisylab/rng.hpp"

namespace noisylab {

namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;
constexpr char kModelMagic[8] = {'N', 'L', 'S', 'C', '0', '0', '0', '1'};

std::uint64_t hash_ngram(const std::vector<std::string>& toks, std::size_t start, int order) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (int k = 0; k < order; ++k) {
    if (k > 0) {
      h ^= 0x1f;
      h *= 0x100000001b3ULL;
    }
    for (unsigned char c : toks[start + static_cast<std::size_t>(k)]) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

}  // namespace

FeatureVec featurize(std::string_view title, const FeatureSpec& spec) {
  const std::vector<std::string> toks = tokenize(title);
  const std::uint32_t mask = spec.dim() - 1;
  std::vector<std::uint32_t> idxs;
  for (int order = 1; order <= spec.max_ngram; ++order) {
    if (toks.size() < static_cast<std::size_t>(order)) break;
    for (std::size_t i = 0; i + static_cast<std::size_t>(order) <= toks.size(); ++i)
      idxs.push_back(static_cast<std::uint32_t>(hash_ngram(toks, i, order)) & mask);
  }
  std::sort(idxs.begin(), idxs.end());
  FeatureVec x;
  for (std::uint32_t idx : idxs) {
    if (!x.empty() && x.back().index == idx)
      x.back().value += 1.0;
    else
      x.push_back({idx, 1.0});
  }
  double norm_sq = 0.0;
  for (const auto& e : x) norm_sq += e.value * e.value;
  if (norm_sq > 0.0) {
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (auto& e : x) e.value *= inv;
  }
  return x;
}

void TrainConfig::validate() const {
  if (epochs < 1 || batch_size < 1 || hidden_size < 1)
    throw Error("train config: epochs, batch_size and hidden_size must be positive");
  if (!(learning_rate > 0.0) || !(gradient_clip_norm > 0.0))
    throw Error("train config: learning_rate and gradient_clip_norm must be positive");
  if (features.max_ngram < 1 || features.max_ngram > 4)
    throw Error("train config: max_ngram must be in [1, 4]");
  if (features.hash_bits < 1 || features.hash_bits > 28)
    throw Error("train config: hash_bits must be in [1, 28]");
}

SoftmaxClassifier::SoftmaxClassifier(FeatureSpec spec, int hidden_size,
                                     std::vector<std::string> labels, std::uint64_t init_seed)
    : spec_(spec), hidden_(hidden_size), labels_(std::move(labels)) {
  const std::size_t dim = spec_.dim();
  const std::size_t h = static_cast<std::size_t>(hidden_);
  const std::size_t k = labels_.size();
  w1.resize(dim * h);
  b1.assign(h, 0.0);
  w2.resize(k * h);
  b2.assign(k, 0.0);
  rng::Stream stream(rng::chain(init_seed, rng::fnv1a64("init")));
  const double a1 = std::sqrt(6.0 / (static_cast<double>(dim) + static_cast<double>(h)));
  for (double& w : w1) w = stream.next_symmetric(a1);
  const double a2 = std::sqrt(6.0 / (static_cast<double>(h) + static_cast<double>(k)));
  for (double& w : w2) w = stream.next_symmetric(a2);
}

bool SoftmaxClassifier::same_shape_as(const SoftmaxClassifier& other) const {
  return spec_ == other.spec_ && hidden_ == other.hidden_ && labels_ == other.labels_;
}

namespace {

// Forward pass; fills post-rectifier hidden units and softmax probabilities,
// returns the log-sum-exp of the logits for loss computation.
double forward_pass(const SoftmaxClassifier& m, const FeatureVec& x, std::vector<double>& hidden,
                    std::vector<double>& logits, std::vector<double>& probs) {
  const std::size_t h = static_cast<std::size_t>(m.hidden_size());
  const std::size_t k = static_cast<std::size_t>(m.num_classes());
  hidden.assign(m.b1.begin(), m.b1.end());
  for (const FeatureEntry& e : x) {
    const double* row = &m.w1[static_cast<std::size_t>(e.index) * h];
    for (std::size_t j = 0; j < h; ++j) hidden[j] += e.value * row[j];
  }
  for (std::size_t j = 0; j < h; ++j) hidden[j] = std::max(0.0, hidden[j]);
  logits.assign(m.b2.begin(), m.b2.end());
  for (std::size_t c = 0; c < k; ++c) {
    const double* row = &m.w2[c * h];
    double z = logits[c];
    for (std::size_t j = 0; j < h; ++j) z += row[j] * hidden[j];
    logits[c] = z;
  }
  const double zmax = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  probs.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    probs[c] = std::exp(logits[c] - zmax);
    sum += probs[c];
  }
  for (double& p : probs) p /= sum;
  return zmax + std::log(sum);
}

void fill_top2(Prediction& p) {
  const int k = static_cast<int>(p.probs.size());
  int top1 = 0;
  for (int c = 1; c < k; ++c)
    if (p.probs[c] > p.probs[top1]) top1 = c;
  int top2 = top1 == 0 ? (k > 1 ? 1 : 0) : 0;
  for (int c = 0; c < k; ++c)
    if (c != top1 && p.probs[c] > p.probs[top2]) top2 = c;
  p.top1 = top1;
  p.top2 = top2;
  p.confidence = p.probs[top1];
}

struct Target {
  int hard = -1;
  const std::vector<double>* soft = nullptr;
};

// Mean cross-entropy over the batch; accumulates exact gradients when
// grads != nullptr. First-layer gradient rows are returned sorted by index.
double batch_loss_and_grad(const SoftmaxClassifier& m, const std::vector<const FeatureVec*>& xs,
                           const std::vector<Target>& targets, Gradients* grads) {
  const std::size_t h = static_cast<std::size_t>(m.hidden_size());
  const std::size_t k = static_cast<std::size_t>(m.num_classes());
  const double inv_batch = 1.0 / static_cast<double>(xs.size());

  std::map<std::uint32_t, std::vector<double>> w1_rows;
  if (grads != nullptr) {
    grads->b1.assign(h, 0.0);
    grads->w2.assign(k * h, 0.0);
    grads->b2.assign(k, 0.0);
  }

  std::vector<double> hidden, logits, probs, dlogits(k), dhidden(h);
  double loss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const FeatureVec& x = *xs[i];
    const double lse = forward_pass(m, x, hidden, logits, probs);
    const Target& t = targets[i];
    if (t.soft != nullptr) {
      double dot = 0.0;
      for (std::size_t c = 0; c < k; ++c) dot += (*t.soft)[c] * logits[c];
      loss += (lse - dot) * inv_batch;
      for (std::size_t c = 0; c < k; ++c) dlogits[c] = (probs[c] - (*t.soft)[c]) * inv_batch;
    } else {
      loss += (lse - logits[static_cast<std::size_t>(t.hard)]) * inv_batch;
      for (std::size_t c = 0; c < k; ++c) dlogits[c] = probs[c] * inv_batch;
      dlogits[static_cast<std::size_t>(t.hard)] -= inv_batch;
    }
    if (grads == nullptr) continue;

    for (std::size_t c = 0; c < k; ++c) {
      grads->b2[c] += dlogits[c];
      double* gw2 = &grads->w2[c * h];
      const double d = dlogits[c];
      for (std::size_t j = 0; j < h; ++j) gw2[j] += d * hidden[j];
    }
    for (std::size_t j = 0; j < h; ++j) {
      if (hidden[j] <= 0.0) {
        dhidden[j] = 0.0;
        continue;
      }
      double d = 0.0;
      for (std::size_t c = 0; c < k; ++c) d += dlogits[c] * m.w2[c * h + j];
      dhidden[j] = d;
      grads->b1[j] += d;
    }
    for (const FeatureEntry& e : x) {
      auto [it, inserted] = w1_rows.try_emplace(e.index);
      if (inserted) it->second.assign(h, 0.0);
      double* row = it->second.data();
      for (std::size_t j = 0; j < h; ++j) row[j] += e.value * dhidden[j];
    }
  }
  if (grads != nullptr) {
    grads->w1_rows.clear();
    grads->w1_rows.reserve(w1_rows.size());
    for (auto& [idx, row] : w1_rows) grads->w1_rows.emplace_back(idx, std::move(row));
  }
  return loss;
}

}  // namespace

Prediction SoftmaxClassifier::predict(std::string_view title) const {
  return predict_features(featurize(title, spec_));
}

Prediction SoftmaxClassifier::predict_features(const FeatureVec& x) const {
  std::vector<double> hidden, logits;
  Prediction p;
  forward_pass(*this, x, hidden, logits, p.probs);
  fill_top2(p);
  return p;
}

double Gradients::squared_norm() const {
  double s = 0.0;
  for (const auto& [idx, row] : w1_rows)
    for (double g : row) s += g * g;
  for (double g : b1) s += g * g;
  for (double g : w2) s += g * g;
  for (double g : b2) s += g * g;
  return s;
}

void Gradients::scale(double factor) {
  for (auto& [idx, row] : w1_rows)
    for (double& g : row) g *= factor;
  for (double& g : b1) g *= factor;
  for (double& g : w2) g *= factor;
  for (double& g : b2) g *= factor;
}

std::pair<double, Gradients> loss_and_gradient(
    const SoftmaxClassifier& m, const std::vector<std::pair<std::string, int>>& batch) {
  if (batch.empty()) throw Error("loss_and_gradient: empty batch");
  std::vector<FeatureVec> feats;
  feats.reserve(batch.size());
  std::vector<const FeatureVec*> xs;
  std::vector<Target> targets;
  for (const auto& [title, label] : batch) {
    if (label < 0 || label >= m.num_classes())
      throw Error("loss_and_gradient: label out of range");
    feats.push_back(featurize(title, m.feature_spec()));
    targets.push_back({label, nullptr});
  }
  for (const auto& f : feats) xs.push_back(&f);
  Gradients grads;
  const double loss = batch_loss_and_grad(m, xs, targets, &grads);
  return {loss, std::move(grads)};
}

std::pair<double, Gradients> loss_and_gradient_soft(
    const SoftmaxClassifier& m,
    const std::vector<std::pair<std::string, std::vector<double>>>& batch) {
  if (batch.empty()) throw Error("loss_and_gradient_soft: empty batch");
  std::vector<FeatureVec> feats;
  feats.reserve(batch.size());
  std::vector<const FeatureVec*> xs;
  std::vector<Target> targets;
  for (const auto& [title, soft] : batch) {
    if (static_cast<int>(soft.size()) != m.num_classes())
      throw Error("loss_and_gradient_soft: target width mismatch");
    feats.push_back(featurize(title, m.feature_spec()));
    targets.push_back({-1, &soft});
  }
  for (const auto& f : feats) xs.push_back(&f);
  Gradients grads;
  const double loss = batch_loss_and_grad(m, xs, targets, &grads);
  return {loss, std::move(grads)};
}

Prediction average_predictions(const std::vector<const SoftmaxClassifier*>& models,
                               std::string_view title) {
  if (models.empty()) throw Error("average_predictions: no models");
  for (const SoftmaxClassifier* m : models)
    if (m->labels() != models[0]->labels())
      throw Error("average_predictions: label spaces differ");
  Prediction avg;
  avg.probs.assign(static_cast<std::size_t>(models[0]->num_classes()), 0.0);
  for (const SoftmaxClassifier* m : models) {
    const Prediction p = m->predict(title);
    for (std::size_t c = 0; c < avg.probs.size(); ++c) avg.probs[c] += p.probs[c];
  }
  for (double& p : avg.probs) p /= static_cast<double>(models.size());
  fill_top2(avg);
  return avg;
}

Prediction average_predictions(const std::vector<const SoftmaxClassifier*>& models,
                               const Item& item) {
  return average_predictions(models, item.title);
}

Trainer::Trainer(const Corpus& corpus, const TrainConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  if (corpus.num_labels() < 2) throw Error("training needs at least 2 labels");
  for (const Item& it : corpus.items()) {
    if (it.split != Split::train) continue;
    ids_.push_back(it.id);
  }
  if (ids_.empty()) throw Error("training needs a non-empty train split");
  std::sort(ids_.begin(), ids_.end());
  features_.reserve(ids_.size());
  labels_.reserve(ids_.size());
  std::unordered_map<std::int64_t, const Item*> by_id;
  for (const Item& it : corpus.items())
    if (it.split == Split::train) by_id.emplace(it.id, &it);
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    const Item& it = *by_id.at(ids_[i]);
    index_of_.emplace(it.id, i);
    features_.push_back(featurize(it.title, cfg_.features));
    labels_.push_back(it.observed_label);
  }
  soft_targets_.resize(ids_.size());
  model_ = SoftmaxClassifier(cfg_.features, cfg_.hidden_size, corpus.labels(), cfg_.seed);
  m_w1_.assign(model_.w1.size(), 0.0);
  v_w1_.assign(model_.w1.size(), 0.0);
  m_b1_.assign(model_.b1.size(), 0.0);
  v_b1_.assign(model_.b1.size(), 0.0);
  m_w2_.assign(model_.w2.size(), 0.0);
  v_w2_.assign(model_.w2.size(), 0.0);
  m_b2_.assign(model_.b2.size(), 0.0);
  v_b2_.assign(model_.b2.size(), 0.0);
}

const FeatureVec& Trainer::features_of(std::int64_t id) const {
  auto it = index_of_.find(id);
  if (it == index_of_.end()) throw Error("unknown train item id " + std::to_string(id));
  return features_[it->second];
}

std::vector<std::vector<std::int64_t>> Trainer::batches(int epoch) const {
  std::vector<std::int64_t> order = ids_;
  std::sort(order.begin(), order.end(), [&](std::int64_t a, std::int64_t b) {
    const auto ha = rng::chain(cfg_.seed, static_cast<std::uint64_t>(epoch),
                               static_cast<std::uint64_t>(a));
    const auto hb = rng::chain(cfg_.seed, static_cast<std::uint64_t>(epoch),
                               static_cast<std::uint64_t>(b));
    if (ha != hb) return ha < hb;
    return a < b;
  });
  std::vector<std::vector<std::int64_t>> out;
  const std::size_t bs = static_cast<std::size_t>(cfg_.batch_size);
  for (std::size_t start = 0; start < order.size(); start += bs) {
    const std::size_t end = std::min(order.size(), start + bs);
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                     order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return out;
}

int Trainer::label(std::int64_t id) const {
  auto it = index_of_.find(id);
  if (it == index_of_.end()) throw Error("unknown train item id " + std::to_string(id));
  return labels_[it->second];
}

void Trainer::set_label(std::int64_t id, int new_label) {
  auto it = index_of_.find(id);
  if (it == index_of_.end()) throw Error("unknown train item id " + std::to_string(id));
  if (new_label < 0 || new_label >= model_.num_classes())
    throw Error("label out of range");
  labels_[it->second] = new_label;
}

void Trainer::set_soft_targets(const SoftLabelTable& table) {
  for (const auto& [id, dist] : table) {
    auto it = index_of_.find(id);
    if (it == index_of_.end()) continue;
    if (static_cast<int>(dist.size()) != model_.num_classes())
      throw Error("soft target width mismatch for item " + std::to_string(id));
    soft_targets_[it->second] = dist;
  }
}

Prediction Trainer::predict_item(std::int64_t id) const {
  return model_.predict_features(features_of(id));
}

std::vector<Trainer::ItemEval> Trainer::evaluate(const std::vector<std::int64_t>& batch_ids) const {
  std::vector<ItemEval> out;
  out.reserve(batch_ids.size());
  std::vector<double> hidden, logits, probs;
  for (std::int64_t id : batch_ids) {
    const std::size_t i = index_of_.at(id);
    const double lse = forward_pass(model_, features_[i], hidden, logits, probs);
    const auto& soft = soft_targets_[i];
    double loss;
    if (!soft.empty()) {
      double dot = 0.0;
      for (std::size_t c = 0; c < probs.size(); ++c) dot += soft[c] * logits[c];
      loss = lse - dot;
    } else {
      loss = lse - logits[static_cast<std::size_t>(labels_[i])];
    }
    int arg = 0;
    for (std::size_t c = 1; c < probs.size(); ++c)
      if (probs[c] > probs[static_cast<std::size_t>(arg)]) arg = static_cast<int>(c);
    out.push_back({loss, arg});
  }
  return out;
}

double Trainer::step(const std::vector<std::int64_t>& batch_ids) {
  if (batch_ids.empty()) throw Error("step: empty batch");
  std::vector<const FeatureVec*> xs;
  std::vector<Target> targets;
  xs.reserve(batch_ids.size());
  targets.reserve(batch_ids.size());
  for (std::int64_t id : batch_ids) {
    const std::size_t i = index_of_.at(id);
    xs.push_back(&features_[i]);
    const auto& soft = soft_targets_[i];
    if (!soft.empty())
      targets.push_back({-1, &soft});
    else
      targets.push_back({labels_[i], nullptr});
  }
  Gradients grads;
  const double loss = batch_loss_and_grad(model_, xs, targets, &grads);
  if (!std::isfinite(loss))
    throw Error("training diverged: non-finite loss at step " + std::to_string(step_count_ + 1) +
                " (learning_rate=" + std::to_string(cfg_.learning_rate) +
                ", hidden_size=" + std::to_string(cfg_.hidden_size) + ")");

  const double norm = std::sqrt(grads.squared_norm());
  if (norm > cfg_.gradient_clip_norm) grads.scale(cfg_.gradient_clip_norm / norm);

  step_count_++;
  const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(step_count_));
  const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(step_count_));
  const double lr = cfg_.learning_rate;
  auto adam = [&](double& param, double& m, double& v, double g) {
    m = kAdamBeta1 * m + (1.0 - kAdamBeta1) * g;
    v = kAdamBeta2 * v + (1.0 - kAdamBeta2) * g * g;
    param -= lr * (m / bc1) / (std::sqrt(v / bc2) + kAdamEps);
  };

  const std::size_t h = static_cast<std::size_t>(cfg_.hidden_size);
  for (const auto& [idx, row] : grads.w1_rows) {
    const std::size_t base = static_cast<std::size_t>(idx) * h;
    for (std::size_t j = 0; j < h; ++j)
      adam(model_.w1[base + j], m_w1_[base + j], v_w1_[base + j], row[j]);
  }
  for (std::size_t j = 0; j < model_.b1.size(); ++j) adam(model_.b1[j], m_b1_[j], v_b1_[j], grads.b1[j]);
  for (std::size_t j = 0; j < model_.w2.size(); ++j) adam(model_.w2[j], m_w2_[j], v_w2_[j], grads.w2[j]);
  for (std::size_t j = 0; j < model_.b2.size(); ++j) adam(model_.b2[j], m_b2_[j], v_b2_[j], grads.b2[j]);
  return loss;
}

void Trainer::run_epoch(int epoch) {
  double weighted = 0.0;
  std::size_t n = 0;
  for (const auto& batch : batches(epoch)) {
    weighted += step(batch) * static_cast<double>(batch.size());
    n += batch.size();
  }
  log_.epoch_mean_loss.push_back(weighted / static_cast<double>(n));
}

TrainResult train(const Corpus& c, const TrainConfig& cfg, const EpochHook& hook,
                  bool record_checkpoints) {
  Trainer trainer(c, cfg);
  TrainResult result;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    trainer.run_epoch(epoch);
    if (record_checkpoints) result.checkpoints.push_back(trainer.model());
    if (hook) hook(epoch, trainer);
  }
  result.model = trainer.model();
  result.model.trained_with = cfg;
  result.log = trainer.log();
  return result;
}

namespace {

template <class T>
void write_pod(std::ofstream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T read_pod(std::ifstream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw Error("truncated model file");
  return value;
}

void write_doubles(std::ofstream& out, const std::vector<double>& v) {
  write_pod(out, static_cast<std::uint64_t>(v.size()));
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::vector<double> read_doubles(std::ifstream& in) {
  const auto n = read_pod<std::uint64_t>(in);
  std::vector<double> v(n);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw Error("truncated model file");
  return v;
}

}  // namespace

void SoftmaxClassifier::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(kModelMagic, sizeof(kModelMagic));
  write_pod(out, static_cast<std::int32_t>(spec_.max_ngram));
  write_pod(out, static_cast<std::int32_t>(spec_.hash_bits));
  write_pod(out, static_cast<std::int32_t>(hidden_));
  write_pod(out, static_cast<std::int32_t>(labels_.size()));
  for (const std::string& label : labels_) {
    write_pod(out, static_cast<std::uint32_t>(label.size()));
    out.write(label.data(), static_cast<std::streamsize>(label.size()));
  }
  const TrainConfig cfg = trained_with.value_or(TrainConfig{});
  write_pod(out, static_cast<std::uint8_t>(trained_with.has_value()));
  write_pod(out, static_cast<std::int32_t>(cfg.epochs));
  write_pod(out, static_cast<std::int32_t>(cfg.batch_size));
  write_pod(out, cfg.learning_rate);
  write_pod(out, cfg.gradient_clip_norm);
  write_pod(out, cfg.seed);
  write_doubles(out, w1);
  write_doubles(out, b1);
  write_doubles(out, w2);
  write_doubles(out, b2);
  if (!out) throw Error("failed writing " + path.string());
}

SoftmaxClassifier SoftmaxClassifier::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kModelMagic, sizeof(magic)) != 0)
    throw Error(path.string() + " is not a model file");
  SoftmaxClassifier m;
  m.spec_.max_ngram = read_pod<std::int32_t>(in);
  m.spec_.hash_bits = read_pod<std::int32_t>(in);
  m.hidden_ = read_pod<std::int32_t>(in);
  const auto k = read_pod<std::int32_t>(in);
  m.labels_.resize(static_cast<std::size_t>(k));
  for (auto& label : m.labels_) {
    const auto len = read_pod<std::uint32_t>(in);
    label.resize(len);
    in.read(label.data(), static_cast<std::streamsize>(len));
    if (!in) throw Error("truncated model file");
  }
  const bool has_cfg = read_pod<std::uint8_t>(in) != 0;
  TrainConfig cfg;
  cfg.epochs = read_pod<std::int32_t>(in);
  cfg.batch_size = read_pod<std::int32_t>(in);
  cfg.learning_rate = read_pod<double>(in);
  cfg.gradient_clip_norm = read_pod<double>(in);
  cfg.seed = read_pod<std::uint64_t>(in);
  cfg.hidden_size = m.hidden_;
  cfg.features = m.spec_;
  if (has_cfg) m.trained_with = cfg;
  m.w1 = read_doubles(in);
  m.b1 = read_doubles(in);
  m.w2 = read_doubles(in);
  m.b2 = read_doubles(in);
  if (m.w1.size() != m.spec_.dim() * static_cast<std::size_t>(m.hidden_) ||
      m.b1.size() != static_cast<std::size_t>(m.hidden_) ||
      m.w2.size() != m.labels_.size() * static_cast<std::size_t>(m.hidden_) ||
      m.b2.size() != m.labels_.size())
    throw Error(path.string() + ": tensor shapes do not match the header");
  return m;
}

}  // namespace noisylab
