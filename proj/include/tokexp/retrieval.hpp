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

// Field-weighted BM25 over products, with predicted tokens indexed as an
// extra expansion field.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "tokexp/corpus.hpp"

namespace tokexp {

enum class IndexField : std::size_t {
  kTitle = 0,
  kAttributes = 1,  // product_type, brand, color, gender
  kDescription = 2,
  kExpansion = 3,
};

inline constexpr std::size_t kIndexFieldCount = 4;
inline constexpr std::array<IndexField, kIndexFieldCount> kAllIndexFields = {
    IndexField::kTitle, IndexField::kAttributes, IndexField::kDescription,
    IndexField::kExpansion};

std::string_view index_field_name(IndexField f);

struct FieldWeights {
  std::array<double, kIndexFieldCount> values = {2.0, 1.0, 1.0, 1.0};

  double operator[](IndexField f) const {
    return values[static_cast<std::size_t>(f)];
  }
  double& operator[](IndexField f) {
    return values[static_cast<std::size_t>(f)];
  }
};

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

// ln(1 + (N - df + 0.5) / (df + 0.5)); never negative.
double bm25_idf(std::size_t doc_count, std::size_t doc_freq);
double bm25_tf(double tf, double doc_len, double avg_len, const Bm25Params& p);

struct Posting {
  std::uint32_t doc = 0;
  std::uint32_t tf = 0;

  friend bool operator==(const Posting&, const Posting&) = default;
};

using Expansions = std::map<std::string, std::vector<std::string>>;

class InvertedIndex {
 public:
  static constexpr int kFormatVersion = 1;

  // Expansion tokens must already be analyzed. An expansion for a product
  // that is not in `products` raises InputError.
  static InvertedIndex build(std::span<const Product> products,
                             const Expansions& expansions = {},
                             const FieldWeights& weights = {},
                             const Bm25Params& params = {});

  std::size_t document_count() const { return doc_ids_.size(); }
  const std::string& doc_id(std::uint32_t doc) const { return doc_ids_[doc]; }
  std::span<const Posting> postings(IndexField f, std::string_view token) const;
  std::uint32_t doc_length(IndexField f, std::uint32_t doc) const {
    return field(f).lengths[doc];
  }
  double average_length(IndexField f) const { return field(f).average; }
  std::size_t vocabulary_size(IndexField f) const {
    return field(f).postings.size();
  }
  const FieldWeights& weights() const { return weights_; }
  const Bm25Params& params() const { return params_; }

  // Documents containing at least one analyzed query token in any field,
  // ascending.
  std::vector<std::uint32_t> matching_documents(std::string_view query) const;

  nlohmann::json to_json() const;
  static InvertedIndex from_json(const nlohmann::json& j);
  void save(const std::string& path) const;
  static InvertedIndex load(const std::string& path);
  // FNV-1a over the serialized form.
  std::uint64_t digest() const;

 private:
  struct FieldIndex {
    std::map<std::string, std::vector<Posting>, std::less<>> postings;
    std::vector<std::uint32_t> lengths;
    double average = 0.0;
  };

  const FieldIndex& field(IndexField f) const {
    return fields_[static_cast<std::size_t>(f)];
  }
  void finalize();

  std::vector<std::string> doc_ids_;
  std::array<FieldIndex, kIndexFieldCount> fields_;
  FieldWeights weights_;
  Bm25Params params_;
};

struct SearchHit {
  std::string doc_id;
  double score = 0.0;

  friend bool operator==(const SearchHit&, const SearchHit&) = default;
};

using SearchResult = std::vector<SearchHit>;

// Sum over fields of weight * BM25 for the unique analyzed query tokens.
// Score descending, then doc id ascending; unmatched documents are left out.
SearchResult search(const InvertedIndex& index, std::string_view query,
                    std::size_t k);

struct RecallResult {
  double recall = 0.0;
  std::size_t pairs = 0;
  std::size_t hits = 0;
  bool empty = false;
};

RecallResult eval_recall(const InvertedIndex& index,
                         std::span<const EngagementPair> pairs, std::size_t k);

// {product_id, query} records; atc_count is optional here.
std::vector<EngagementPair> load_query_pairs_file(const std::string& path);

enum class Judgment { kIrrelevant, kSubstitute, kExactMatch };

struct GainScale {
  double exact_match = 2.0;
  double substitute = 1.0;
  double irrelevant = 0.0;

  double gain(Judgment j) const;
};

// DCG with 1 / log2(rank + 1) discounts over the first k judgments, divided
// by the DCG of the same judgments in ideal order. 0 when the ideal is 0.
double ndcg_at_k(std::span<const Judgment> ranked, std::size_t k,
                 const GainScale& gains = {});
double ndcg_at_10(std::span<const Judgment> ranked, const GainScale& gains = {});

}  // namespace tokexp
