// SPDX-License-Identifier: Apache-2.0
#include "noisylab/denoise.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "fixture.hpp"
#include "noisylab/rng.hpp"

using namespace noisylab;

namespace {

std::vector<std::string> split_words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> words;
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

// Two-class model driven by marker words: each marker adds `strength` to its
// class logit, scaled by the title's L2 feature normalization.
SoftmaxClassifier marker_model(const std::vector<std::pair<std::string, std::pair<int, double>>>&
                                   markers) {
  FeatureSpec spec;
  spec.max_ngram = 1;
  spec.hash_bits = 16;
  SoftmaxClassifier m(spec, 2, {"a", "b"}, 0);
  std::fill(m.w1.begin(), m.w1.end(), 0.0);
  std::fill(m.w2.begin(), m.w2.end(), 0.0);
  std::set<std::uint32_t> used;
  for (const auto& [word, target] : markers) {
    const FeatureVec x = featurize(word, spec);
    REQUIRE(x.size() == 1);
    REQUIRE(used.insert(x[0].index).second);  // hash collisions would break the setup
    m.w1[static_cast<std::size_t>(x[0].index) * 2 + static_cast<std::size_t>(target.first)] =
        target.second;
  }
  m.w2[0] = 1.0;  // hidden unit 0 -> class a logit
  m.w2[3] = 1.0;  // hidden unit 1 -> class b logit
  return m;
}

}  // namespace

TEST_CASE("drop_words follows the guard-before-drop trace") {
  CHECK(drop_words("one two three") == "one two three");
  CHECK(drop_words("single") == "single");
  CHECK(drop_words("") == "");
  CHECK(drop_words("AB CD EF GH IJ KL") == "GH IJ KL");

  // twenty long words: one dropped per side, then trimmed to fifteen
  std::string twenty;
  for (int i = 0; i < 20; ++i) {
    if (i > 0) twenty += ' ';
    twenty += "word" + std::to_string(10 + i);  // 6 letters each
  }
  const std::string out = drop_words(twenty);
  const auto words = split_words(out);
  REQUIRE(words.size() == 15);
  CHECK(words.front() == "word11");
  CHECK(words.back() == "word25");
}

TEST_CASE("drop_words output is a bounded contiguous subsequence") {
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    rng::Stream st(seed);
    const int n_words = static_cast<int>(st.next_u64() % 26);
    std::string title;
    for (int w = 0; w < n_words; ++w) {
      if (w > 0) title += st.next_u64() % 8 == 0 ? "   " : " ";
      const int len = 1 + static_cast<int>(st.next_u64() % 12);
      for (int k = 0; k < len; ++k)
        title += static_cast<char>('a' + st.next_u64() % 26);
    }
    const std::vector<std::string> input = split_words(title);
    const std::vector<std::string> output = split_words(drop_words(title));

    CHECK(output.size() <= 15);
    if (!input.empty()) CHECK(!output.empty());
    if (input.size() <= 3) CHECK(output == input);

    bool contiguous = false;
    for (std::size_t lo = 0; lo + output.size() <= input.size(); ++lo) {
      if (std::equal(output.begin(), output.end(), input.begin() + static_cast<std::ptrdiff_t>(lo))) {
        contiguous = true;
        break;
      }
    }
    CHECK((output.empty() || contiguous));
  }
}

TEST_CASE("denoise applies confident, certain, removal and keep branches") {
  // markers: sa strong-a, wa weak-a, w2/wb weak pulls, sb strong-b
  const SoftmaxClassifier model = marker_model({
      {"sa", {0, 3.0}},
      {"wa", {0, 2.2}},
      {"wan", {0, 2.2}},
      {"wb", {1, 1.1}},
      {"sb", {1, 3.0}},
  });

  std::vector<Item> items;
  items.push_back({0, "sa qq rr", 0, 0, Split::train});             // (a) keep
  items.push_back({1, "sa qq rr", 0, 1, Split::train});             // (a) relabel, fixes noise
  items.push_back({2, "wa qq rr", 0, 1, Split::train});             // (b) certain relabel
  items.push_back({3, "wa qq rr", 0, 0, Split::train});             // (b) certain keep
  items.push_back({4, "wa aa wb cc dd", 0, 0, Split::train});       // (c) removed
  items.push_back({5, "wa wan sb cc dd", 0, 0, Split::train});      // (d) kept unchanged
  items.push_back({6, "sa qq rr", 0, 0, Split::test});
  const Corpus c(items, {"a", "b"}, "manual");

  // confirm the constructed predictions sit where the branches need them
  {
    const Prediction p0 = model.predict("sa qq rr");
    CHECK(p0.top1 == 0);
    CHECK(p0.confidence >= 0.8);
    const Prediction p2 = model.predict("wa qq rr");
    CHECK(p2.top1 == 0);
    CHECK(p2.confidence < 0.8);
    const Prediction o4 = model.predict("wa aa wb cc dd");
    const Prediction d4 = model.predict(drop_words("wa aa wb cc dd"));
    CHECK(drop_words("wa aa wb cc dd") == "wb cc dd");
    CHECK(o4.top1 == 0);
    CHECK(d4.top1 == 1);
    CHECK(o4.confidence <= 0.8);
    CHECK(d4.confidence <= 0.8);
    const Prediction o5 = model.predict("wa wan sb cc dd");
    const Prediction d5 = model.predict(drop_words("wa wan sb cc dd"));
    CHECK(drop_words("wa wan sb cc dd") == "sb cc dd");
    CHECK(o5.top1 == 0);
    CHECK(o5.confidence <= 0.8);
    CHECK(d5.top1 == 1);
    CHECK(d5.confidence > 0.8);
  }

  FlipManifest manifest;
  manifest[1] = {0, 1, 0.9};
  manifest[2] = {0, 1, 0.8};

  const DenoiseOutcome outcome = denoise(c, model, 0.8, &manifest);
  CHECK(outcome.report.relabeled == 2);
  CHECK(outcome.report.removed == 1);
  CHECK(outcome.report.kept_unchanged == 3);
  CHECK(outcome.report.relabeled + outcome.report.removed + outcome.report.kept_unchanged == 6);
  CHECK(outcome.report.data_reduction == doctest::Approx(1.0 / 6.0).epsilon(1e-12));

  // accounting identity: wrong_before 2 of 6, all fixed, none introduced
  REQUIRE(outcome.report.noise_reduction.has_value());
  std::size_t fixed = 0, introduced = 0, removed_wrong = 0;
  for (const DenoiseAuditEntry& e : outcome.audit) {
    const Item& before = c.item_by_id(e.id);
    const int truth = manifest.count(e.id) ? manifest.at(e.id).true_label : before.observed_label;
    if (e.action == DenoiseAction::relabel) {
      if (before.observed_label != truth && e.label_original == truth) fixed++;
      if (before.observed_label == truth && e.label_original != truth) introduced++;
    }
    if (e.action == DenoiseAction::remove && before.observed_label != truth) removed_wrong++;
  }
  const double rate_before = 2.0 / 6.0;
  const double wrong_after = 2.0 - static_cast<double>(fixed) + static_cast<double>(introduced) -
                             static_cast<double>(removed_wrong);
  const double rate_after = wrong_after / 5.0;
  CHECK(*outcome.report.noise_reduction ==
        doctest::Approx((rate_before - rate_after) / rate_before).epsilon(1e-12));
  CHECK(*outcome.report.noise_reduction == doctest::Approx(1.0).epsilon(1e-12));

  // titles, true labels and the test split stay untouched
  for (const Item& it : outcome.corpus.items()) {
    const Item& before = c.item_by_id(it.id);
    CHECK(it.title == before.title);
    CHECK(it.true_label == before.true_label);
    if (it.split == Split::test) CHECK(it.observed_label == before.observed_label);
  }
  CHECK(outcome.corpus.count_split(Split::test) == 1);

  // second pass with the same model changes nothing further
  const DenoiseOutcome second = denoise(outcome.corpus, model, 0.8);
  CHECK(second.report.removed == 0);
  CHECK(second.report.relabeled == 0);
  CHECK(second.corpus.size() == outcome.corpus.size());
}

TEST_CASE("denoise audit log round trips") {
  const SoftmaxClassifier model = marker_model({{"sa", {0, 3.0}}});
  std::vector<Item> items = {{0, "sa xx", 0, 0, Split::train}, {1, "yy zz", 1, 1, Split::train}};
  const Corpus c(items, {"a", "b"}, "manual");
  const DenoiseOutcome outcome = denoise(c, model, 0.8);
  const auto path = std::filesystem::temp_directory_path() / "denoise_audit.jsonl";
  write_denoise_audit(outcome.audit, path);
  std::ifstream in(path);
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) {
    if (!line.empty()) lines++;
    CHECK(line.find("\"action\"") != std::string::npos);
  }
  CHECK(lines == outcome.audit.size());
}

TEST_CASE("denoise on a noisy two-class corpus stays within the reduction bands") {
  // 1000 items, 20% of train flipped, denoiser trained on the clean corpus
  Corpus clean = stratified_split(fixture::toy_two_class(1000, 3), 0.1, 9);
  TrainConfig cfg;
  cfg.epochs = 6;
  cfg.batch_size = 16;
  cfg.learning_rate = 5e-3;
  cfg.hidden_size = 16;
  cfg.seed = 4;
  cfg.features.hash_bits = 10;
  const SoftmaxClassifier model = train(clean, cfg, nullptr, false).model;

  std::vector<Item> noisy_items = clean.items();
  FlipManifest manifest;
  std::size_t flipped = 0, train_count = 0;
  for (Item& it : noisy_items) {
    if (it.split != Split::train) continue;
    train_count++;
    if (train_count % 5 != 0) continue;  // 20%
    manifest[it.id] = {it.true_label, 1 - it.true_label, 0.5};
    it.observed_label = 1 - it.true_label;
    flipped++;
  }
  const Corpus noisy(noisy_items, clean.labels(), "noisy");
  REQUIRE(flipped == train_count / 5);

  const DenoiseOutcome outcome = denoise(noisy, model, 0.8, &manifest);
  REQUIRE(outcome.report.noise_reduction.has_value());
  CHECK(*outcome.report.noise_reduction >= 0.26);
  CHECK(outcome.report.data_reduction <= 0.10);
}

TEST_CASE("denoise reports emptied classes") {
  // class b has one train item that gets removed by the uncertainty rule
  const SoftmaxClassifier model = marker_model({
      {"sa", {0, 3.0}}, {"wa", {0, 2.2}}, {"wb", {1, 1.1}},
  });
  std::vector<Item> items;
  items.push_back({0, "sa xx yy", 0, 0, Split::train});
  items.push_back({1, "wa aa wb cc dd", 1, 1, Split::train});  // removed
  items.push_back({2, "sa keep me", 0, 0, Split::test});
  items.push_back({3, "wb um well", 1, 1, Split::test});
  const Corpus c(items, {"a", "b"}, "manual");
  const DenoiseOutcome outcome = denoise(c, model, 0.8);
  REQUIRE(outcome.report.emptied_classes.size() == 1);
  CHECK(outcome.report.emptied_classes[0] == 1);
}
