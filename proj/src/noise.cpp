// SPDX-License-Identifier: Apache-2.0
#include "noisylab/noise.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "noisylab/rng.hpp"
#include "json.hpp"

namespace noisylab {

namespace {

std::size_t half_up(double x) { return static_cast<std::size_t>(std::floor(x + 0.5)); }

std::vector<std::size_t> train_indices(const Corpus& c) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < c.items().size(); ++i)
    if (c.items()[i].split == Split::train) out.push_back(i);
  if (out.empty()) throw Error("no train items to corrupt");
  return out;
}

void require_clean(const Corpus& c) {
  for (const Item& it : c.items())
    if (it.observed_label != it.true_label)
      throw Error("noise simulators need a clean corpus; item " + std::to_string(it.id) +
                  " is already corrupted");
}

NoiseResult commit_flips(const Corpus& c, const std::vector<std::size_t>& flip_item_indices,
                         const std::vector<int>& new_labels, const std::vector<double>& scores,
                         std::size_t train_size, const NoiseSpec& spec) {
  NoiseResult result;
  result.corpus = c;
  result.method = spec.method;
  result.seed = spec.seed;
  auto& items = result.corpus.mutable_items();
  for (std::size_t j = 0; j < flip_item_indices.size(); ++j) {
    Item& it = items[flip_item_indices[j]];
    result.flips.emplace(it.id, Flip{it.observed_label, new_labels[j], scores[j]});
    it.observed_label = new_labels[j];
  }
  result.achieved_rate =
      static_cast<double>(result.flips.size()) / static_cast<double>(train_size);
  result.corpus.validate();
  return result;
}

struct ScoredCandidate {
  std::size_t item_index;
  std::int64_t id;
  int candidate;
  double score;
};

// Shared sort-and-flip tail of the multi-epoch, multi-model and similarity
// simulators: order by score descending and corrupt the top round(r * N).
NoiseResult flip_top_fraction(const Corpus& c, std::vector<ScoredCandidate> scored,
                              std::size_t train_size, const NoiseSpec& spec,
                              const char* scarcity_context) {
  const std::size_t want = half_up(spec.rate * static_cast<double>(train_size));
  if (want > scored.size())
    throw Error(std::string(scarcity_context) + ": only " + std::to_string(scored.size()) +
                " flip candidates for " + std::to_string(want) + " requested flips" +
                " (attainable rate " +
                std::to_string(static_cast<double>(scored.size()) /
                               static_cast<double>(train_size)) +
                ")");
  std::vector<std::int64_t> ids(scored.size());
  std::vector<double> scores(scored.size());
  for (std::size_t i = 0; i < scored.size(); ++i) {
    ids[i] = scored[i].id;
    scores[i] = scored[i].score;
  }
  const std::vector<std::size_t> order = detail::rank_by_score_desc(ids, scores);
  std::vector<std::size_t> flip_indices;
  std::vector<int> new_labels;
  std::vector<double> flip_scores;
  for (std::size_t r = 0; r < want; ++r) {
    const ScoredCandidate& sc = scored[order[r]];
    flip_indices.push_back(sc.item_index);
    new_labels.push_back(sc.candidate);
    flip_scores.push_back(sc.score);
  }
  return commit_flips(c, flip_indices, new_labels, flip_scores, train_size, spec);
}

}  // namespace

namespace detail {

std::vector<std::size_t> rank_by_score_desc(const std::vector<std::int64_t>& ids,
                                            const std::vector<double>& scores) {
  std::vector<std::size_t> order(ids.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return ids[a] < ids[b];
  });
  return order;
}

std::size_t multinomial_draw(const std::vector<double>& weights, std::uint64_t hash) {
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw Error("multinomial weights must be non-negative");
    total += w;
  }
  if (total <= 0.0) throw Error("multinomial weights sum to zero");
  const double u = rng::to_unit(hash) * total;
  double cum = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    cum += weights[i];
    if (u < cum && weights[i] > 0.0) return i;
  }
  for (std::size_t i = weights.size(); i-- > 0;)
    if (weights[i] > 0.0) return i;
  throw Error("multinomial draw failed");
}

}  // namespace detail

std::string to_string(NoiseMethod m) {
  switch (m) {
    case NoiseMethod::last_epoch: return "last_epoch";
    case NoiseMethod::multi_epoch: return "multi_epoch";
    case NoiseMethod::multi_model: return "multi_model";
    case NoiseMethod::similarity: return "similarity";
  }
  throw Error("unknown noise method");
}

NoiseMethod noise_method_from_string(const std::string& s) {
  if (s == "last_epoch") return NoiseMethod::last_epoch;
  if (s == "multi_epoch") return NoiseMethod::multi_epoch;
  if (s == "multi_model") return NoiseMethod::multi_model;
  if (s == "similarity") return NoiseMethod::similarity;
  throw Error("unknown noise method: " + s);
}

NoiseResult last_epoch_idn(const Corpus& c, const SoftmaxClassifier& m, const NoiseSpec& spec) {
  require_clean(c);
  if (!(spec.rate > 0.0 && spec.rate < 1.0)) throw Error("noise rate must be in (0, 1)");
  const auto idxs = train_indices(c);
  const std::size_t n = idxs.size();

  // Per-item ambiguity, flip target and uniform draw are all fixed; only the
  // scalar factor moves during the search.
  std::vector<double> ambiguity(n), draw(n);
  std::vector<int> target(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Item& it = c.items()[idxs[i]];
    const Prediction p = m.predict(it.title);
    ambiguity[i] = 1.0 - (p.probs[static_cast<std::size_t>(p.top1)] -
                          p.probs[static_cast<std::size_t>(p.top2)]);
    target[i] = p.top1 == it.true_label ? p.top2 : p.top1;
    draw[i] = rng::to_unit(rng::chain(spec.seed, static_cast<std::uint64_t>(it.id)));
  }

  auto flips_at = [&](double factor) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (draw[i] < std::min(1.0, factor * ambiguity[i])) count++;
    return count;
  };

  const double tol = 0.005;
  const auto in_band = [&](std::size_t flips) {
    const double rate = static_cast<double>(flips) / static_cast<double>(n);
    return rate >= spec.rate - tol && rate <= spec.rate + tol;
  };

  double lo = 0.0, hi = 1.0;
  std::size_t hi_flips = flips_at(hi);
  int grow = 0;
  while (static_cast<double>(hi_flips) / static_cast<double>(n) < spec.rate - tol && grow < 64) {
    hi *= 2.0;
    hi_flips = flips_at(hi);
    grow++;
  }
  if (static_cast<double>(hi_flips) / static_cast<double>(n) < spec.rate - tol) {
    throw Error("last_epoch_idn: target rate " + std::to_string(spec.rate) +
                " not attainable; attainable range is [0, " +
                std::to_string(static_cast<double>(hi_flips) / static_cast<double>(n)) + "]");
  }

  double factor = hi;
  std::size_t flips = hi_flips;
  if (!in_band(flips)) {
    for (int iter = 0; iter < 50 && !in_band(flips); ++iter) {
      factor = 0.5 * (lo + hi);
      flips = flips_at(factor);
      const double rate = static_cast<double>(flips) / static_cast<double>(n);
      if (rate < spec.rate)
        lo = factor;
      else
        hi = factor;
    }
  }
  if (!in_band(flips))
    throw Error("last_epoch_idn: bisection failed to land within ±0.005 of rate " +
                std::to_string(spec.rate) + "; closest achieved " +
                std::to_string(static_cast<double>(flips) / static_cast<double>(n)));

  std::vector<std::size_t> flip_indices;
  std::vector<int> new_labels;
  std::vector<double> scores;
  for (std::size_t i = 0; i < n; ++i) {
    if (draw[i] < std::min(1.0, factor * ambiguity[i])) {
      flip_indices.push_back(idxs[i]);
      new_labels.push_back(target[i]);
      scores.push_back(ambiguity[i]);
    }
  }
  return commit_flips(c, flip_indices, new_labels, scores, n, spec);
}

namespace {

NoiseResult model_set_idn(const Corpus& c, const std::vector<const SoftmaxClassifier*>& models,
                          const NoiseSpec& spec, const char* context) {
  require_clean(c);
  if (!(spec.rate >= 0.0 && spec.rate < 1.0)) throw Error("noise rate must be in [0, 1)");
  const auto idxs = train_indices(c);
  std::vector<ScoredCandidate> scored;
  scored.reserve(idxs.size());
  for (std::size_t item_index : idxs) {
    const Item& it = c.items()[item_index];
    const Prediction avg = average_predictions(models, it.title);
    int candidate = -1;
    for (int k = 0; k < static_cast<int>(avg.probs.size()); ++k) {
      if (k == it.true_label) continue;
      if (candidate < 0 || avg.probs[static_cast<std::size_t>(k)] >
                               avg.probs[static_cast<std::size_t>(candidate)])
        candidate = k;
    }
    scored.push_back({item_index, it.id, candidate,
                      avg.probs[static_cast<std::size_t>(candidate)]});
  }
  return flip_top_fraction(c, std::move(scored), idxs.size(), spec, context);
}

}  // namespace

NoiseResult multi_epoch_idn(const Corpus& c, const CheckpointSequence& seq,
                            const NoiseSpec& spec) {
  if (seq.empty()) throw Error("multi_epoch_idn: empty checkpoint sequence");
  std::vector<const SoftmaxClassifier*> models;
  for (const auto& m : seq) models.push_back(&m);
  return model_set_idn(c, models, spec, "multi_epoch_idn");
}

NoiseResult multi_model_idn(const Corpus& c, const NoiseSpec& spec) {
  if (spec.params.model_count < 1) throw Error("multi_model_idn: model_count must be >= 1");
  std::vector<SoftmaxClassifier> trained;
  for (int i = 1; i <= spec.params.model_count; ++i) {
    TrainConfig cfg = spec.params.train;
    cfg.seed = spec.seed + static_cast<std::uint64_t>(i);
    trained.push_back(train(c, cfg, nullptr, /*record_checkpoints=*/false).model);
  }
  std::vector<const SoftmaxClassifier*> models;
  for (const auto& m : trained) models.push_back(&m);
  return model_set_idn(c, models, spec, "multi_model_idn");
}

NoiseResult similarity_idn(const Corpus& c, const TfIdfModel& tfidf, const EmbeddingTable* emb,
                           const NoiseSpec& spec) {
  require_clean(c);
  if (!(spec.rate >= 0.0 && spec.rate < 1.0)) throw Error("noise rate must be in [0, 1)");
  if (c.num_labels() < 2) throw Error("similarity_idn: need at least 2 labels");
  const auto idxs = train_indices(c);
  const std::size_t n = idxs.size();
  const int k = c.num_labels();

  std::vector<SparseVector> vecs(n);
  std::vector<int> label_of(n);
  for (std::size_t i = 0; i < n; ++i) {
    vecs[i] = tfidf.vectorize(c.items()[idxs[i]].title);
    label_of[i] = c.items()[idxs[i]].true_label;
  }
  std::vector<std::vector<std::size_t>> by_label(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < n; ++i)
    by_label[static_cast<std::size_t>(label_of[i])].push_back(i);

  // Above the exact-pairwise limit, each item is compared against a capped,
  // deterministically chosen subsample of every other class.
  const bool exact = n <= spec.params.exact_pairwise_limit;
  std::vector<std::vector<std::size_t>> pool(static_cast<std::size_t>(k));
  for (int cls = 0; cls < k; ++cls) {
    auto& members = by_label[static_cast<std::size_t>(cls)];
    if (exact || members.size() <= spec.params.similarity_cap) {
      pool[static_cast<std::size_t>(cls)] = members;
    } else {
      std::vector<std::size_t> sample = members;
      std::sort(sample.begin(), sample.end(), [&](std::size_t a, std::size_t b) {
        const auto ha = rng::chain(spec.seed, rng::fnv1a64("simcap"),
                                   static_cast<std::uint64_t>(c.items()[idxs[a]].id));
        const auto hb = rng::chain(spec.seed, rng::fnv1a64("simcap"),
                                   static_cast<std::uint64_t>(c.items()[idxs[b]].id));
        if (ha != hb) return ha < hb;
        return c.items()[idxs[a]].id < c.items()[idxs[b]].id;
      });
      sample.resize(spec.params.similarity_cap);
      pool[static_cast<std::size_t>(cls)] = std::move(sample);
    }
  }

  auto clamp01 = [](double x) { return std::clamp(x, 0.0, 1.0); };
  std::vector<ScoredCandidate> scored;
  for (std::size_t i = 0; i < n; ++i) {
    const Item& it = c.items()[idxs[i]];
    std::vector<double> maxsim(static_cast<std::size_t>(k), 0.0);
    const std::vector<double>* ei = emb != nullptr ? emb->find(it.id) : nullptr;
    if (emb != nullptr && ei == nullptr)
      throw Error("missing embedding for item " + std::to_string(it.id));
    for (int cls = 0; cls < k; ++cls) {
      if (cls == label_of[i]) continue;
      double best = 0.0;
      for (std::size_t j : pool[static_cast<std::size_t>(cls)]) {
        double s = clamp01(cosine(vecs[i], vecs[j]));
        if (ei != nullptr) {
          const std::vector<double>* ej = emb->find(c.items()[idxs[j]].id);
          if (ej == nullptr)
            throw Error("missing embedding for item " + std::to_string(c.items()[idxs[j]].id));
          s = std::max(s, clamp01(cosine(std::span(*ei), std::span(*ej))));
        }
        best = std::max(best, s);
      }
      maxsim[static_cast<std::size_t>(cls)] = best;
    }
    std::vector<double> weights;
    std::vector<int> others;
    for (int cls = 0; cls < k; ++cls) {
      if (cls == label_of[i]) continue;
      others.push_back(cls);
      weights.push_back(maxsim[static_cast<std::size_t>(cls)]);
    }
    double total = 0.0;
    for (double w : weights) total += w;
    if (total <= 0.0) continue;  // nothing similar anywhere; not a flip candidate
    const std::size_t pick = detail::multinomial_draw(
        weights, rng::chain(spec.seed, static_cast<std::uint64_t>(it.id)));
    scored.push_back({idxs[i], it.id, others[pick], weights[pick]});
  }
  return flip_top_fraction(c, std::move(scored), n, spec, "similarity_idn");
}

NoiseMeasure measure_noise(const NoiseResult& result) {
  NoiseMeasure m;
  const std::size_t k = static_cast<std::size_t>(result.corpus.num_labels());
  m.transition.assign(k, std::vector<std::size_t>(k, 0));
  for (const auto& [id, flip] : result.flips)
    m.transition[static_cast<std::size_t>(flip.old_label)]
                [static_cast<std::size_t>(flip.new_label)]++;
  const std::size_t train_size = result.corpus.count_split(Split::train);
  m.achieved_rate = train_size == 0
                        ? 0.0
                        : static_cast<double>(result.flips.size()) / static_cast<double>(train_size);
  return m;
}

void write_flip_manifest(const NoiseResult& result, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& [id, flip] : result.flips) {
    nlohmann::ordered_json j;
    j["id"] = id;
    j["true"] = flip.old_label;
    j["noisy"] = flip.new_label;
    j["score"] = flip.score;
    j["method"] = to_string(result.method);
    j["seed"] = result.seed;
    out << j.dump() << '\n';
  }
}

FlipManifest read_flip_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  FlipManifest manifest;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    line_no++;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    manifest[j.at("id").get<std::int64_t>()] = ManifestEntry{
        j.at("true").get<int>(), j.at("noisy").get<int>(), j.at("score").get<double>()};
  }
  return manifest;
}

}  // namespace noisylab
