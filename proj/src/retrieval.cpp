// Copyright 2026 The tokexp Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tokexp/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include "tokexp/error.hpp"
#include "tokexp/jsonl.hpp"

namespace tokexp {

std::string_view index_field_name(IndexField f) {
  switch (f) {
    case IndexField::kTitle: return "title";
    case IndexField::kAttributes: return "attributes";
    case IndexField::kDescription: return "description";
    case IndexField::kExpansion: return "expansion";
  }
  throw InternalError("unknown index field");
}

double bm25_idf(std::size_t doc_count, std::size_t doc_freq) {
  const auto n = static_cast<double>(doc_count);
  const auto df = static_cast<double>(doc_freq);
  return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

double bm25_tf(double tf, double doc_len, double avg_len, const Bm25Params& p) {
  double norm = avg_len > 0.0 ? doc_len / avg_len : 0.0;
  return tf * (p.k1 + 1.0) / (tf + p.k1 * (1.0 - p.b + p.b * norm));
}

namespace {

std::vector<std::string> field_tokens(const Product& p, IndexField f) {
  switch (f) {
    case IndexField::kTitle:
      return analyze(p.title);
    case IndexField::kAttributes: {
      std::vector<std::string> out;
      for (const std::string* s : {&p.product_type, &p.brand, &p.color, &p.gender}) {
        auto t = analyze(*s);
        out.insert(out.end(), t.begin(), t.end());
      }
      return out;
    }
    case IndexField::kDescription:
      return analyze(p.description);
    case IndexField::kExpansion:
      return {};
  }
  throw InternalError("unknown index field");
}

std::set<std::string> unique_query_tokens(std::string_view query) {
  auto tokens = analyze(query);
  return {tokens.begin(), tokens.end()};
}

}  // namespace

InvertedIndex InvertedIndex::build(std::span<const Product> products,
                                   const Expansions& expansions,
                                   const FieldWeights& weights,
                                   const Bm25Params& params) {
  InvertedIndex index;
  index.weights_ = weights;
  index.params_ = params;
  std::unordered_map<std::string, std::uint32_t> doc_of;
  for (const auto& p : products) {
    auto doc = static_cast<std::uint32_t>(index.doc_ids_.size());
    if (!doc_of.emplace(p.id, doc).second) {
      throw InputError("duplicate product id in index input: " + p.id);
    }
    index.doc_ids_.push_back(p.id);
  }
  for (const auto& [id, tokens] : expansions) {
    if (!doc_of.contains(id)) {
      throw InputError("expansion references unknown product: " + id);
    }
  }

  for (IndexField f : kAllIndexFields) {
    FieldIndex& fi = index.fields_[static_cast<std::size_t>(f)];
    fi.lengths.assign(products.size(), 0);
    for (std::uint32_t doc = 0; doc < products.size(); ++doc) {
      std::vector<std::string> tokens;
      if (f == IndexField::kExpansion) {
        auto it = expansions.find(index.doc_ids_[doc]);
        if (it != expansions.end()) {
          for (const auto& t : it->second) {
            if (!t.empty()) tokens.push_back(t);
          }
        }
      } else {
        tokens = field_tokens(products[doc], f);
      }
      std::map<std::string, std::uint32_t> tf;
      for (const auto& t : tokens) ++tf[t];
      for (const auto& [t, n] : tf) fi.postings[t].push_back({doc, n});
      fi.lengths[doc] = static_cast<std::uint32_t>(tokens.size());
    }
  }
  index.finalize();
  return index;
}

void InvertedIndex::finalize() {
  for (auto& fi : fields_) {
    double total = 0.0;
    for (auto len : fi.lengths) total += len;
    fi.average = fi.lengths.empty() ? 0.0 : total / static_cast<double>(fi.lengths.size());
  }
}

std::span<const Posting> InvertedIndex::postings(IndexField f,
                                                 std::string_view token) const {
  const auto& p = field(f).postings;
  auto it = p.find(token);
  if (it == p.end()) return {};
  return it->second;
}

std::vector<std::uint32_t> InvertedIndex::matching_documents(
    std::string_view query) const {
  std::set<std::uint32_t> docs;
  for (const auto& t : unique_query_tokens(query)) {
    for (IndexField f : kAllIndexFields) {
      for (const auto& p : postings(f, t)) docs.insert(p.doc);
    }
  }
  return {docs.begin(), docs.end()};
}

SearchResult search(const InvertedIndex& index, std::string_view query,
                    std::size_t k) {
  if (k < 1) throw ConfigError("k must be >= 1");
  std::map<std::uint32_t, double> scores;
  const std::size_t n = index.document_count();
  for (const auto& t : unique_query_tokens(query)) {
    for (IndexField f : kAllIndexFields) {
      auto postings = index.postings(f, t);
      if (postings.empty()) continue;
      const double idf = bm25_idf(n, postings.size());
      const double avg = index.average_length(f);
      const double w = index.weights()[f];
      for (const auto& p : postings) {
        double tf = bm25_tf(p.tf, index.doc_length(f, p.doc), avg, index.params());
        scores[p.doc] += w * idf * tf;
      }
    }
  }
  SearchResult hits;
  hits.reserve(scores.size());
  for (const auto& [doc, s] : scores) hits.push_back({index.doc_id(doc), s});
  std::sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.doc_id < b.doc_id;
  });
  if (hits.size() > k) hits.resize(k);
  return hits;
}

nlohmann::json InvertedIndex::to_json() const {
  nlohmann::json j;
  j["format"] = "tokexp-index";
  j["version"] = kFormatVersion;
  j["bm25"] = {{"k1", params_.k1}, {"b", params_.b}};
  j["documents"] = doc_ids_;
  nlohmann::json fields = nlohmann::json::object();
  for (IndexField f : kAllIndexFields) {
    const FieldIndex& fi = field(f);
    nlohmann::json postings = nlohmann::json::object();
    for (const auto& [token, list] : fi.postings) {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& p : list) arr.push_back({p.doc, p.tf});
      postings[token] = std::move(arr);
    }
    fields[std::string(index_field_name(f))] = {
        {"weight", weights_[f]}, {"lengths", fi.lengths}, {"postings", postings}};
  }
  j["fields"] = std::move(fields);
  return j;
}

InvertedIndex InvertedIndex::from_json(const nlohmann::json& j) {
  InvertedIndex index;
  try {
    if (j.at("format") != "tokexp-index") throw InputError("not an index file");
    if (j.at("version") != kFormatVersion) {
      throw InputError("unsupported index version: " + j.at("version").dump());
    }
    index.params_.k1 = j.at("bm25").at("k1").get<double>();
    index.params_.b = j.at("bm25").at("b").get<double>();
    index.doc_ids_ = j.at("documents").get<std::vector<std::string>>();
    const std::size_t n = index.doc_ids_.size();
    for (IndexField f : kAllIndexFields) {
      const auto& jf = j.at("fields").at(std::string(index_field_name(f)));
      FieldIndex& fi = index.fields_[static_cast<std::size_t>(f)];
      index.weights_[f] = jf.at("weight").get<double>();
      fi.lengths = jf.at("lengths").get<std::vector<std::uint32_t>>();
      if (fi.lengths.size() != n) throw InputError("index lengths mismatch");
      std::vector<std::uint64_t> counted(n, 0);
      for (const auto& [token, arr] : jf.at("postings").items()) {
        auto& list = fi.postings[token];
        for (const auto& e : arr) {
          Posting p{e.at(0).get<std::uint32_t>(), e.at(1).get<std::uint32_t>()};
          if (p.doc >= n || p.tf == 0 || (!list.empty() && list.back().doc >= p.doc)) {
            throw InputError("corrupt postings for token '" + token + "'");
          }
          counted[p.doc] += p.tf;
          list.push_back(p);
        }
      }
      for (std::size_t d = 0; d < n; ++d) {
        if (counted[d] != fi.lengths[d]) {
          throw InputError("index lengths inconsistent with postings");
        }
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed index: ") + e.what());
  }
  index.finalize();
  return index;
}

void InvertedIndex::save(const std::string& path) const {
  io::write_file(path, to_json().dump() + "\n");
}

InvertedIndex InvertedIndex::load(const std::string& path) {
  std::string text = io::read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path + ": malformed index: " + e.what());
  }
  return from_json(j);
}

std::uint64_t InvertedIndex::digest() const {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : to_json().dump()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

RecallResult eval_recall(const InvertedIndex& index,
                         std::span<const EngagementPair> pairs, std::size_t k) {
  RecallResult r;
  r.pairs = pairs.size();
  if (pairs.empty()) {
    r.empty = true;
    return r;
  }
  for (const auto& pair : pairs) {
    SearchResult hits = search(index, pair.query, k);
    bool found = std::any_of(hits.begin(), hits.end(), [&](const SearchHit& h) {
      return h.doc_id == pair.product_id;
    });
    if (found) ++r.hits;
  }
  r.recall = static_cast<double>(r.hits) / static_cast<double>(r.pairs);
  return r;
}

std::vector<EngagementPair> load_query_pairs_file(const std::string& path) {
  std::vector<EngagementPair> pairs;
  io::for_each_record_in_file(path, [&](const io::Json& r, std::size_t line) {
    EngagementPair p;
    p.product_id = io::require_string(r, "product_id", path, line);
    p.query = io::require_string(r, "query", path, line);
    if (r.contains("atc_count")) {
      p.atc_count = io::require_integer(r, "atc_count", path, line);
    }
    pairs.push_back(std::move(p));
  });
  return pairs;
}

double GainScale::gain(Judgment j) const {
  switch (j) {
    case Judgment::kExactMatch: return exact_match;
    case Judgment::kSubstitute: return substitute;
    case Judgment::kIrrelevant: return irrelevant;
  }
  throw InternalError("unknown judgment");
}

namespace {

double dcg(std::span<const double> gains, std::size_t k) {
  double total = 0.0;
  for (std::size_t i = 0; i < std::min(k, gains.size()); ++i) {
    total += gains[i] / std::log2(static_cast<double>(i) + 2.0);
  }
  return total;
}

}  // namespace

double ndcg_at_k(std::span<const Judgment> ranked, std::size_t k,
                 const GainScale& gains) {
  std::vector<double> g;
  g.reserve(ranked.size());
  for (Judgment j : ranked) g.push_back(gains.gain(j));
  std::vector<double> ideal = g;
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  double ideal_dcg = dcg(ideal, k);
  if (ideal_dcg <= 0.0) return 0.0;
  return dcg(g, k) / ideal_dcg;
}

double ndcg_at_10(std::span<const Judgment> ranked, const GainScale& gains) {
  return ndcg_at_k(ranked, 10, gains);
}

}  // namespace tokexp
