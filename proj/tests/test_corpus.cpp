// SPDX-License-Identifier: Apache-2.0
#include "noisylab/corpus.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "fixture.hpp"

using namespace noisylab;
namespace fs = std::filesystem;

namespace {

fs::path write_temp(const std::string& name, const std::string& content) {
  const fs::path path = fs::temp_directory_path() / name;
  std::ofstream out(path, std::ios::binary);
  out << content;
  return path;
}

}  // namespace

TEST_CASE("load_corpus reads a small csv") {
  const auto path = write_temp("corpus_small.csv",
                               "title,label\n"
                               "red apple,a\n"
                               "blue chair,b\n"
                               "green apple,a\n");
  const Corpus c = load_corpus(path);
  CHECK(c.size() == 3);
  CHECK(c.num_labels() == 2);
  CHECK(c.labels()[0] == "a");
  CHECK(c.labels()[1] == "b");
  CHECK(c.items()[2].observed_label == 0);
  for (const Item& it : c.items()) CHECK(it.split == Split::train);
}

TEST_CASE("load_corpus handles quoting and custom columns") {
  const auto path = write_temp("corpus_quoted.csv",
                               "sku,label,title\n"
                               "1,books,\"Adventures, Vol. 2 \"\"Deluxe\"\"\"\n"
                               "2,books,\"multi\nline title\"\n");
  const Corpus c = load_corpus(path);
  REQUIRE(c.size() == 2);
  CHECK(c.items()[0].title == "Adventures, Vol. 2 \"Deluxe\"");
  CHECK(c.items()[1].title == "multi\nline title");
}

TEST_CASE("load_corpus reports malformed records with their line") {
  const auto path = write_temp("corpus_bad.csv",
                               "title,label\n"
                               "fine title,a\n"
                               "missing label column\n");
  CHECK_THROWS_WITH_AS(load_corpus(path), doctest::Contains(":3"), Error);
}

TEST_CASE("load_corpus rejects an empty file") {
  const auto path = write_temp("corpus_empty.csv", "");
  CHECK_THROWS_AS(load_corpus(path), Error);
}

TEST_CASE("load_corpus rejects a header without required columns") {
  const auto path = write_temp("corpus_nohdr.csv", "name,cat\nx,y\n");
  CHECK_THROWS_AS(load_corpus(path), Error);
}

TEST_CASE("filter_rare_labels keeps labels at the threshold") {
  // counts {a:10, b:10, c:9} at min_count 10 leave 20 items over 2 labels
  std::vector<std::pair<std::string, std::string>> rows;
  for (int i = 0; i < 10; ++i) rows.emplace_back("title a" + std::to_string(i), "a");
  for (int i = 0; i < 10; ++i) rows.emplace_back("title b" + std::to_string(i), "b");
  for (int i = 0; i < 9; ++i) rows.emplace_back("title c" + std::to_string(i), "c");
  const Corpus c = fixture::corpus_from_rows(rows);
  const Corpus filtered = filter_rare_labels(c, 10);
  CHECK(filtered.size() == 20);
  CHECK(filtered.num_labels() == 2);
  CHECK(filtered.labels() == std::vector<std::string>{"a", "b"});
}

TEST_CASE("filter_rare_labels straddles the threshold") {
  std::vector<std::pair<std::string, std::string>> rows;
  for (int i = 0; i < 12; ++i) rows.emplace_back("ta " + std::to_string(i), "a");
  for (int i = 0; i < 9; ++i) rows.emplace_back("tb " + std::to_string(i), "b");
  const Corpus filtered = filter_rare_labels(fixture::corpus_from_rows(rows), 10);
  CHECK(filtered.size() == 12);
  CHECK(filtered.num_labels() == 1);
}

TEST_CASE("filter_rare_labels with min_count 1 is the identity") {
  const Corpus c = fixture::toy_two_class(30);
  const Corpus filtered = filter_rare_labels(c, 1);
  CHECK(filtered.size() == c.size());
  CHECK(filtered.labels() == c.labels());
}

TEST_CASE("filter_rare_labels is idempotent") {
  std::vector<std::pair<std::string, std::string>> rows;
  for (int i = 0; i < 25; ++i) rows.emplace_back("ta " + std::to_string(i), "a");
  for (int i = 0; i < 10; ++i) rows.emplace_back("tb " + std::to_string(i), "b");
  for (int i = 0; i < 3; ++i) rows.emplace_back("tc " + std::to_string(i), "c");
  const Corpus once = filter_rare_labels(fixture::corpus_from_rows(rows), 10);
  const Corpus twice = filter_rare_labels(once, 10);
  REQUIRE(once.size() == twice.size());
  CHECK(once.labels() == twice.labels());
  for (std::size_t i = 0; i < once.size(); ++i) CHECK(once.items()[i].id == twice.items()[i].id);
}

TEST_CASE("filter_rare_labels errors when nothing survives") {
  std::vector<std::pair<std::string, std::string>> rows = {{"only one", "a"}};
  CHECK_THROWS_AS(filter_rare_labels(fixture::corpus_from_rows(rows), 10), Error);
}

TEST_CASE("stratified_split hits exact per-class counts") {
  std::vector<std::pair<std::string, std::string>> rows;
  for (int i = 0; i < 100; ++i) rows.emplace_back("item " + std::to_string(i), "a");
  const Corpus c = stratified_split(fixture::corpus_from_rows(rows), 0.1, 11);
  CHECK(c.count_split(Split::test) == 10);
  CHECK(c.count_split(Split::train) == 90);
}

TEST_CASE("stratified_split rounds half up with a per-class minimum") {
  // counts {a:25, b:10} at fraction 0.1 give test sizes {a:3, b:1}
  std::vector<std::pair<std::string, std::string>> rows;
  for (int i = 0; i < 25; ++i) rows.emplace_back("ta " + std::to_string(i), "a");
  for (int i = 0; i < 10; ++i) rows.emplace_back("tb " + std::to_string(i), "b");
  const Corpus c = stratified_split(fixture::corpus_from_rows(rows), 0.1, 3);
  std::size_t test_a = 0, test_b = 0;
  for (const Item& it : c.items()) {
    if (it.split != Split::test) continue;
    (it.observed_label == 0 ? test_a : test_b)++;
  }
  CHECK(test_a == 3);
  CHECK(test_b == 1);
}

TEST_CASE("stratified_split is deterministic in the seed and partitions") {
  const Corpus base = fixture::make_synthetic({.n_items = 500, .seed = 42});
  const Corpus a = stratified_split(base, 0.1, 5);
  const Corpus b = stratified_split(base, 0.1, 5);
  const Corpus other = stratified_split(base, 0.1, 6);
  std::set<std::int64_t> ta, tb, tother;
  for (const Item& it : a.items())
    if (it.split == Split::test) ta.insert(it.id);
  for (const Item& it : b.items())
    if (it.split == Split::test) tb.insert(it.id);
  for (const Item& it : other.items())
    if (it.split == Split::test) tother.insert(it.id);
  CHECK(ta == tb);
  CHECK(ta != tother);
  CHECK(a.count_split(Split::train) + a.count_split(Split::test) == a.size());
}

TEST_CASE("stratified_split rejects single-item classes") {
  std::vector<std::pair<std::string, std::string>> rows = {{"ta", "a"}, {"tb", "a"}, {"tc", "b"}};
  CHECK_THROWS_AS(stratified_split(fixture::corpus_from_rows(rows), 0.5, 1), Error);
}

TEST_CASE("kl_skewness is zero on uniform counts") {
  std::vector<std::pair<std::string, std::string>> rows;
  for (int i = 0; i < 40; ++i) rows.emplace_back("t " + std::to_string(i), "l" + std::to_string(i % 4));
  const SkewReport r = kl_skewness(fixture::corpus_from_rows(rows), Split::train);
  CHECK(r.kl_divergence == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("kl_skewness matches the hand-computed 90/10 value") {
  // frequencies (0.9, 0.1): 0.9*ln(1.8) + 0.1*ln(0.2) = 0.368064...
  std::vector<std::pair<std::string, std::string>> rows;
  for (int i = 0; i < 90; ++i) rows.emplace_back("t " + std::to_string(i), "big");
  for (int i = 0; i < 10; ++i) rows.emplace_back("u " + std::to_string(i), "small");
  const SkewReport r = kl_skewness(fixture::corpus_from_rows(rows), Split::train);
  CHECK(r.kl_divergence == doctest::Approx(0.3681).epsilon(1e-3));
  CHECK(r.kl_divergence == doctest::Approx(0.9 * std::log(1.8) + 0.1 * std::log(0.2)).epsilon(1e-12));
}

TEST_CASE("kl_skewness is non-negative on random corpora") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    fixture::SyntheticSpec spec;
    spec.n_items = 200 + static_cast<int>(seed) * 13;
    spec.seed = seed;
    const SkewReport r = kl_skewness(fixture::make_synthetic(spec), Split::train);
    CHECK(r.kl_divergence >= 0.0);
  }
}

TEST_CASE("snapshot round trip preserves items and splits") {
  const Corpus c = stratified_split(fixture::make_synthetic({.n_items = 300, .seed = 9}), 0.1, 4);
  const fs::path path = fs::temp_directory_path() / "snapshot_rt.jsonl";
  write_snapshot(c, path);
  const Corpus back = read_snapshot(path);
  REQUIRE(back.size() == c.size());
  CHECK(back.labels() == c.labels());
  for (std::size_t i = 0; i < c.size(); ++i) {
    CHECK(back.items()[i].id == c.items()[i].id);
    CHECK(back.items()[i].title == c.items()[i].title);
    CHECK(back.items()[i].observed_label == c.items()[i].observed_label);
    CHECK(back.items()[i].split == c.items()[i].split);
  }
}

TEST_CASE("corpus validation rejects corrupted test items") {
  std::vector<Item> items;
  items.push_back({0, "alpha beta", 0, 0, Split::test});
  items.push_back({1, "gamma delta", 1, 1, Split::train});
  Corpus c(items, {"a", "b"}, "manual");
  auto bad = items;
  bad[0].observed_label = 1;
  CHECK_THROWS_AS(Corpus(bad, {"a", "b"}, "manual"), Error);
}
