// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "noisylab/error.hpp"

namespace noisylab {

enum class Split { train, test };

std::string to_string(Split s);
Split split_from_string(const std::string& s);

// One labeled title. true_label is fixed at load time; observed_label is what
// trainers see and is the only thing noise/denoise stages may rewrite.
struct Item {
  std::int64_t id = 0;
  std::string title;
  int true_label = 0;
  int observed_label = 0;
  Split split = Split::train;
};

class Corpus {
 public:
  Corpus() = default;
  Corpus(std::vector<Item> items, std::vector<std::string> labels, std::string source);

  const std::vector<Item>& items() const { return items_; }
  std::vector<Item>& mutable_items() { return items_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& source() const { return source_; }

  std::size_t size() const { return items_.size(); }
  int num_labels() const { return static_cast<int>(labels_.size()); }
  std::size_t count_split(Split s) const;
  std::vector<std::size_t> label_counts(Split s) const;

  const Item& item_by_id(std::int64_t id) const;

  // Checks id uniqueness, label index ranges, non-blank titles and the rule
  // that test items are never corrupted. Throws Error on violation.
  void validate() const;

 private:
  std::vector<Item> items_;
  std::vector<std::string> labels_;
  std::string source_;
};

struct SkewReport {
  double kl_divergence = 0.0;           // nats, relative to the uniform distribution
  std::vector<std::size_t> per_class_counts;
};

struct CsvFormat {
  char delimiter = ',';
};

// Reads a delimited UTF-8 file with a header row naming `title` and `label`
// columns. Quoting follows RFC 4180. Every item starts in the train split.
Corpus load_corpus(const std::filesystem::path& path, const CsvFormat& format = {});

// Keeps only items whose label occurs at least min_count times; the label
// vocabulary is re-indexed densely, preserving first-seen order.
Corpus filter_rare_labels(const Corpus& c, std::size_t min_count = 10);

// Tags max(1, round(count * test_fraction)) items per label as test, capped
// so at least one train item remains per label. Selection is keyed on
// (seed, item id), so it does not depend on item order.
Corpus stratified_split(const Corpus& c, double test_fraction, std::uint64_t seed);

SkewReport kl_skewness(const Corpus& c, Split split);

// JSON-lines snapshot: {"id":..,"title":..,"label":..,"split":..} with the
// observed label name. True labels are never written here.
void write_snapshot(const Corpus& c, const std::filesystem::path& path);
Corpus read_snapshot(const std::filesystem::path& path);

}  // namespace noisylab
