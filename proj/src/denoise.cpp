// SPDX-License-Identifier: Apache-2.0
#include "noisylab/denoise.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "json.hpp"

namespace noisylab {

namespace {

std::vector<std::string_view> whitespace_words(std::string_view s) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    const std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) words.push_back(s.substr(start, i - start));
  }
  return words;
}

// UTF-8 code points, not bytes.
std::size_t letter_count(std::string_view word) {
  std::size_t n = 0;
  for (unsigned char c : word)
    if ((c & 0xC0) != 0x80) ++n;
  return n;
}

}  // namespace

std::string drop_words(std::string_view title) {
  const auto words = whitespace_words(title);
  std::size_t lo = 0, hi = words.size();

  std::size_t dropped = 0;
  while (dropped < 5 && hi - lo >= 4) {
    dropped += letter_count(words[lo]);
    ++lo;
  }
  dropped = 0;
  while (dropped < 5 && hi - lo >= 4) {
    dropped += letter_count(words[hi - 1]);
    --hi;
  }
  while (hi - lo > 15) --hi;

  std::string out;
  for (std::size_t i = lo; i < hi; ++i) {
    if (!out.empty()) out.push_back(' ');
    out.append(words[i]);
  }
  return out;
}

DenoiseOutcome denoise(const Corpus& c, const SoftmaxClassifier& m, double threshold,
                       const FlipManifest* manifest) {
  DenoiseOutcome outcome;
  outcome.corpus = c;
  auto& items = outcome.corpus.mutable_items();

  std::size_t train_before = 0;
  std::size_t wrong_before = 0, wrong_after = 0, train_after = 0;
  std::vector<std::size_t> class_train_before(static_cast<std::size_t>(c.num_labels()), 0);
  std::vector<std::size_t> class_train_after(static_cast<std::size_t>(c.num_labels()), 0);

  auto true_label_of = [&](const Item& it) {
    if (manifest == nullptr) return it.true_label;
    auto found = manifest->find(it.id);
    return found == manifest->end() ? it.observed_label : found->second.true_label;
  };

  std::vector<Item> kept;
  kept.reserve(items.size());
  for (Item& it : items) {
    if (it.split != Split::train) {
      kept.push_back(it);
      continue;
    }
    train_before++;
    class_train_before[static_cast<std::size_t>(it.observed_label)]++;
    const int truth = true_label_of(it);
    if (manifest != nullptr && it.observed_label != truth) wrong_before++;

    const Prediction orig = m.predict(it.title);
    const Prediction drop = m.predict(drop_words(it.title));

    DenoiseAuditEntry entry;
    entry.id = it.id;
    entry.label_original = orig.top1;
    entry.conf_original = orig.confidence;
    entry.label_dropped = drop.top1;
    entry.conf_dropped = drop.confidence;

    bool removed = false;
    if (orig.confidence >= threshold) {
      entry.action = orig.top1 != it.observed_label ? DenoiseAction::relabel : DenoiseAction::keep;
      it.observed_label = orig.top1;
    } else if (orig.top1 == drop.top1) {
      entry.action = orig.top1 != it.observed_label ? DenoiseAction::relabel : DenoiseAction::keep;
      it.observed_label = orig.top1;
    } else if (orig.confidence <= threshold && drop.confidence <= threshold) {
      entry.action = DenoiseAction::remove;
      removed = true;
    } else {
      entry.action = DenoiseAction::keep;
    }

    if (entry.action == DenoiseAction::relabel) outcome.report.relabeled++;
    else if (entry.action == DenoiseAction::remove) outcome.report.removed++;
    else outcome.report.kept_unchanged++;

    outcome.audit.push_back(entry);
    if (!removed) {
      train_after++;
      class_train_after[static_cast<std::size_t>(it.observed_label)]++;
      if (manifest != nullptr && it.observed_label != truth) wrong_after++;
      kept.push_back(it);
    }
  }

  items = std::move(kept);
  outcome.corpus.validate();

  if (train_before == 0) throw Error("denoise: no train items");
  outcome.report.data_reduction =
      static_cast<double>(outcome.report.removed) / static_cast<double>(train_before);
  if (manifest != nullptr && wrong_before > 0) {
    const double rate_before =
        static_cast<double>(wrong_before) / static_cast<double>(train_before);
    const double rate_after =
        train_after == 0 ? 0.0 : static_cast<double>(wrong_after) / static_cast<double>(train_after);
    outcome.report.noise_reduction = (rate_before - rate_after) / rate_before;
  }
  for (int k = 0; k < c.num_labels(); ++k) {
    if (class_train_before[static_cast<std::size_t>(k)] > 0 &&
        class_train_after[static_cast<std::size_t>(k)] == 0)
      outcome.report.emptied_classes.push_back(k);
  }
  return outcome;
}

void write_denoise_audit(const std::vector<DenoiseAuditEntry>& audit,
                         const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  for (const DenoiseAuditEntry& e : audit) {
    nlohmann::ordered_json j;
    j["id"] = e.id;
    j["action"] = e.action == DenoiseAction::relabel  ? "relabel"
                  : e.action == DenoiseAction::remove ? "remove"
                                                      : "keep";
    j["L_o"] = e.label_original;
    j["P_o"] = e.conf_original;
    j["L_d"] = e.label_dropped;
    j["P_d"] = e.conf_dropped;
    out << j.dump() << '\n';
  }
}

}  // namespace noisylab
