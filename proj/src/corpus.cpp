// SPDX-License-Identifier: Apache-2.0
#include "noisylab/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include "noisylab/rng.hpp"
#include "json.hpp"

namespace noisylab {

namespace {

bool is_blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

std::string to_string(Split s) { return s == Split::train ? "train" : "test"; }

Split split_from_string(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "test") return Split::test;
  throw Error("unknown split tag: " + s);
}

Corpus::Corpus(std::vector<Item> items, std::vector<std::string> labels, std::string source)
    : items_(std::move(items)), labels_(std::move(labels)), source_(std::move(source)) {
  validate();
}

std::size_t Corpus::count_split(Split s) const {
  return static_cast<std::size_t>(
      std::count_if(items_.begin(), items_.end(), [s](const Item& it) { return it.split == s; }));
}

std::vector<std::size_t> Corpus::label_counts(Split s) const {
  std::vector<std::size_t> counts(labels_.size(), 0);
  for (const Item& it : items_) {
    if (it.split == s) counts[static_cast<std::size_t>(it.observed_label)]++;
  }
  return counts;
}

const Item& Corpus::item_by_id(std::int64_t id) const {
  for (const Item& it : items_) {
    if (it.id == id) return it;
  }
  throw Error("no item with id " + std::to_string(id));
}

void Corpus::validate() const {
  std::unordered_set<std::int64_t> seen;
  seen.reserve(items_.size());
  const int k = num_labels();
  for (const Item& it : items_) {
    if (!seen.insert(it.id).second)
      throw Error("duplicate item id " + std::to_string(it.id));
    if (it.true_label < 0 || it.true_label >= k || it.observed_label < 0 || it.observed_label >= k)
      throw Error("label index out of range for item " + std::to_string(it.id));
    if (is_blank(it.title))
      throw Error("blank title for item " + std::to_string(it.id));
    if (it.split == Split::test && it.observed_label != it.true_label)
      throw Error("test item " + std::to_string(it.id) + " has a corrupted label");
  }
}

namespace {

// RFC 4180 record reader. Returns false at end of input; throws on an
// unterminated quoted field. line_no tracks the first physical line of the
// record for error messages.
bool read_record(std::istream& in, char delim, std::vector<std::string>& fields,
                 std::size_t& line_no, std::size_t& next_line) {
  fields.clear();
  int c = in.get();
  if (c == EOF) return false;
  line_no = next_line;
  std::string field;
  bool in_quotes = false;
  bool quoted_field = false;
  while (true) {
    if (c == EOF) {
      if (in_quotes) throw Error("unterminated quoted field starting at line " + std::to_string(line_no));
      fields.push_back(field);
      return true;
    }
    char ch = static_cast<char>(c);
    if (in_quotes) {
      if (ch == '"') {
        if (in.peek() == '"') {
          field.push_back('"');
          in.get();
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') next_line++;
        if (ch != '\r' || in.peek() != '\n') field.push_back(ch);
        if (ch == '\r' && in.peek() == '\n') {
          field.push_back('\n');
          in.get();
          next_line++;
        }
      }
    } else if (ch == '"' && field.empty() && !quoted_field) {
      in_quotes = true;
      quoted_field = true;
    } else if (ch == delim) {
      fields.push_back(field);
      field.clear();
      quoted_field = false;
    } else if (ch == '\n' || ch == '\r') {
      if (ch == '\r' && in.peek() == '\n') in.get();
      next_line++;
      fields.push_back(field);
      return true;
    } else {
      field.push_back(ch);
    }
    c = in.get();
  }
}

}  // namespace

Corpus load_corpus(const std::filesystem::path& path, const CsvFormat& format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());

  std::vector<std::string> fields;
  std::size_t line_no = 1, next_line = 1;
  if (!read_record(in, format.delimiter, fields, line_no, next_line))
    throw Error("empty file: " + path.string());

  auto find_col = [&](const std::string& name) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      std::string f = fields[i];
      if (!f.empty() && f.front() == '\xEF' && f.size() >= 3 && f[1] == '\xBB' && f[2] == '\xBF')
        f = f.substr(3);  // strip UTF-8 BOM
      if (f == name) return static_cast<std::ptrdiff_t>(i);
    }
    return static_cast<std::ptrdiff_t>(-1);
  };
  const auto title_col = find_col("title");
  const auto label_col = find_col("label");
  if (title_col < 0 || label_col < 0)
    throw Error("header row of " + path.string() + " must name `title` and `label` columns");
  const std::size_t ncols = fields.size();

  std::vector<Item> items;
  std::vector<std::string> labels;
  std::unordered_map<std::string, int> label_index;
  std::int64_t next_id = 0;
  while (read_record(in, format.delimiter, fields, line_no, next_line)) {
    if (fields.size() == 1 && fields[0].empty()) continue;  // trailing blank line
    if (fields.size() != ncols)
      throw Error(path.string() + ":" + std::to_string(line_no) + ": expected " +
                  std::to_string(ncols) + " fields, got " + std::to_string(fields.size()));
    const std::string& title = fields[static_cast<std::size_t>(title_col)];
    const std::string& label = fields[static_cast<std::size_t>(label_col)];
    if (is_blank(title))
      throw Error(path.string() + ":" + std::to_string(line_no) + ": blank title");
    if (label.empty())
      throw Error(path.string() + ":" + std::to_string(line_no) + ": empty label");
    auto [it, inserted] = label_index.try_emplace(label, static_cast<int>(labels.size()));
    if (inserted) labels.push_back(label);
    Item item;
    item.id = next_id++;
    item.title = title;
    item.true_label = item.observed_label = it->second;
    item.split = Split::train;
    items.push_back(std::move(item));
  }
  if (items.empty()) throw Error("no records in " + path.string());
  return Corpus(std::move(items), std::move(labels), path.string());
}

Corpus filter_rare_labels(const Corpus& c, std::size_t min_count) {
  if (min_count < 1) throw Error("min_count must be >= 1");
  std::vector<std::size_t> counts(c.labels().size(), 0);
  for (const Item& it : c.items()) counts[static_cast<std::size_t>(it.observed_label)]++;

  std::vector<int> remap(c.labels().size(), -1);
  std::vector<std::string> labels;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] >= min_count) {
      remap[k] = static_cast<int>(labels.size());
      labels.push_back(c.labels()[k]);
    }
  }
  if (labels.empty()) throw Error("no label meets min_count " + std::to_string(min_count));

  std::vector<Item> items;
  items.reserve(c.size());
  for (const Item& it : c.items()) {
    const int t = remap[static_cast<std::size_t>(it.true_label)];
    const int o = remap[static_cast<std::size_t>(it.observed_label)];
    if (o < 0 || t < 0) continue;
    Item copy = it;
    copy.true_label = t;
    copy.observed_label = o;
    items.push_back(std::move(copy));
  }
  return Corpus(std::move(items), std::move(labels), c.source());
}

Corpus stratified_split(const Corpus& c, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw Error("test_fraction must be in (0, 1)");

  std::vector<std::vector<std::size_t>> by_label(c.labels().size());
  for (std::size_t i = 0; i < c.items().size(); ++i)
    by_label[static_cast<std::size_t>(c.items()[i].observed_label)].push_back(i);

  std::vector<Item> items = c.items();
  for (std::size_t k = 0; k < by_label.size(); ++k) {
    auto& idxs = by_label[k];
    if (idxs.empty()) continue;
    if (idxs.size() < 2)
      throw Error("label `" + c.labels()[k] + "` has a single item; filter before splitting");
    const double want = static_cast<double>(idxs.size()) * test_fraction;
    std::size_t n_test = static_cast<std::size_t>(std::floor(want + 0.5));  // half-up
    n_test = std::max<std::size_t>(1, std::min(n_test, idxs.size() - 1));
    std::sort(idxs.begin(), idxs.end(), [&](std::size_t a, std::size_t b) {
      const auto ha = rng::chain(seed, static_cast<std::uint64_t>(items[a].id));
      const auto hb = rng::chain(seed, static_cast<std::uint64_t>(items[b].id));
      if (ha != hb) return ha < hb;
      return items[a].id < items[b].id;
    });
    for (std::size_t j = 0; j < idxs.size(); ++j)
      items[idxs[j]].split = j < n_test ? Split::test : Split::train;
  }
  return Corpus(std::move(items), c.labels(), c.source());
}

SkewReport kl_skewness(const Corpus& c, Split split) {
  SkewReport report;
  report.per_class_counts = c.label_counts(split);
  std::size_t total = 0;
  for (auto n : report.per_class_counts) total += n;
  if (total == 0) throw Error("split has no items");
  const double k = static_cast<double>(c.num_labels());
  double kl = 0.0;
  for (auto n : report.per_class_counts) {
    if (n == 0) continue;
    const double p = static_cast<double>(n) / static_cast<double>(total);
    kl += p * std::log(p * k);
  }
  report.kl_divergence = std::max(0.0, kl);
  return report;
}

void write_snapshot(const Corpus& c, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  for (const Item& it : c.items()) {
    nlohmann::ordered_json j;
    j["id"] = it.id;
    j["title"] = it.title;
    j["label"] = c.labels()[static_cast<std::size_t>(it.observed_label)];
    j["split"] = to_string(it.split);
    out << j.dump() << '\n';
  }
}

Corpus read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<Item> items;
  std::vector<std::string> labels;
  std::unordered_map<std::string, int> label_index;
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
    Item it;
    it.id = j.at("id").get<std::int64_t>();
    it.title = j.at("title").get<std::string>();
    const std::string label = j.at("label").get<std::string>();
    auto [pos, inserted] = label_index.try_emplace(label, static_cast<int>(labels.size()));
    if (inserted) labels.push_back(label);
    it.true_label = it.observed_label = pos->second;
    it.split = split_from_string(j.at("split").get<std::string>());
    items.push_back(std::move(it));
  }
  if (items.empty()) throw Error("no records in " + path.string());
  return Corpus(std::move(items), std::move(labels), path.string());
}

}  // namespace noisylab
