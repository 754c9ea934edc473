// SPDX-License-Identifier: Apache-2.0
#include "noisylab/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

#include "json.hpp"

namespace noisylab {

double SparseVector::l2_norm() const {
  double s = 0.0;
  for (const auto& [idx, w] : entries) s += w * w;
  return std::sqrt(s);
}

std::vector<std::string> tokenize(std::string_view title) {
  std::vector<std::string> tokens;
  std::string cur;
  for (unsigned char ch : title) {
    const bool word_char = std::isalnum(ch) || ch >= 0x80;
    if (word_char) {
      cur.push_back(static_cast<char>(std::tolower(ch)));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

TfIdfModel TfIdfModel::fit(const std::vector<std::string>& train_titles) {
  TfIdfModel m;
  std::vector<std::size_t> df;
  std::vector<std::uint32_t> seen_in_doc;
  bool any_nonempty = false;
  for (const std::string& title : train_titles) {
    seen_in_doc.clear();
    for (const std::string& tok : tokenize(title)) {
      auto [it, inserted] = m.vocab_.try_emplace(tok, static_cast<std::uint32_t>(df.size()));
      if (inserted) df.push_back(0);
      if (std::find(seen_in_doc.begin(), seen_in_doc.end(), it->second) == seen_in_doc.end()) {
        seen_in_doc.push_back(it->second);
        df[it->second]++;
      }
    }
    if (!seen_in_doc.empty()) any_nonempty = true;
  }
  if (!any_nonempty) throw Error("cannot fit tf-idf: all titles are empty");
  m.doc_count_ = train_titles.size();
  m.idf_.resize(df.size());
  const double n = static_cast<double>(m.doc_count_);
  for (std::size_t t = 0; t < df.size(); ++t)
    m.idf_[t] = std::log((1.0 + n) / (1.0 + static_cast<double>(df[t]))) + 1.0;
  return m;
}

double TfIdfModel::idf_of(std::string_view term) const {
  auto it = vocab_.find(std::string(term));
  return it == vocab_.end() ? 0.0 : idf_[it->second];
}

SparseVector TfIdfModel::vectorize(std::string_view title) const {
  SparseVector v;
  v.dim = static_cast<std::uint32_t>(idf_.size());
  std::vector<std::pair<std::uint32_t, double>> counts;
  for (const std::string& tok : tokenize(title)) {
    auto it = vocab_.find(tok);
    if (it == vocab_.end()) continue;
    counts.emplace_back(it->second, 1.0);
  }
  if (counts.empty()) return v;
  std::sort(counts.begin(), counts.end());
  for (const auto& [idx, one] : counts) {
    if (!v.entries.empty() && v.entries.back().first == idx)
      v.entries.back().second += one;
    else
      v.entries.emplace_back(idx, one);
  }
  double norm_sq = 0.0;
  for (auto& [idx, w] : v.entries) {
    w *= idf_[idx];
    norm_sq += w * w;
  }
  const double norm = std::sqrt(norm_sq);
  for (auto& [idx, w] : v.entries) w /= norm;
  return v;
}

double cosine(const SparseVector& a, const SparseVector& b) {
  if (a.dim != b.dim) throw Error("cosine: dimension mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (const auto& [i, w] : a.entries) na += w * w;
  for (const auto& [i, w] : b.entries) nb += w * w;
  if (na == 0.0 || nb == 0.0) return 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.entries.size() && j < b.entries.size()) {
    if (a.entries[i].first == b.entries[j].first) {
      dot += a.entries[i].second * b.entries[j].second;
      ++i;
      ++j;
    } else if (a.entries[i].first < b.entries[j].first) {
      ++i;
    } else {
      ++j;
    }
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error("cosine: dimension mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

EmbeddingTable EmbeddingTable::load_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  EmbeddingTable table;
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
    table.insert(j.at("id").get<std::int64_t>(), j.at("vec").get<std::vector<double>>());
  }
  if (table.size() == 0) throw Error("no embeddings in " + path.string());
  return table;
}

void EmbeddingTable::insert(std::int64_t id, std::vector<double> vec) {
  if (width_ == 0) width_ = vec.size();
  if (vec.empty() || vec.size() != width_)
    throw Error("embedding width mismatch for id " + std::to_string(id) + ": expected " +
                std::to_string(width_) + ", got " + std::to_string(vec.size()));
  if (!vectors_.emplace(id, std::move(vec)).second)
    throw Error("duplicate embedding id " + std::to_string(id));
}

const std::vector<double>* EmbeddingTable::find(std::int64_t id) const {
  auto it = vectors_.find(id);
  return it == vectors_.end() ? nullptr : &it->second;
}

namespace {
double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }
}  // namespace

double similarity(const Item& i, const Item& j, const TfIdfModel& tfidf,
                  const EmbeddingTable* emb) {
  double score = clamp01(cosine(tfidf.vectorize(i.title), tfidf.vectorize(j.title)));
  if (emb != nullptr) {
    const auto* vi = emb->find(i.id);
    const auto* vj = emb->find(j.id);
    if (vi == nullptr || vj == nullptr)
      throw Error("missing embedding for item " + std::to_string(vi == nullptr ? i.id : j.id));
    score = std::max(score, clamp01(cosine(std::span(*vi), std::span(*vj))));
  }
  return score;
}

}  // namespace noisylab
