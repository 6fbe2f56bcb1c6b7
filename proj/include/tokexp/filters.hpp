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

// Preprocessing chain turning engagement pairs into the query-level and
// token-level training datasets: relevance filter (RF), price-token filter
// (PTF), full-match filter (FMF) and overlapping-token filter (OTF).

#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "tokexp/corpus.hpp"

namespace tokexp {

class RelevanceScorer {
 public:
  virtual ~RelevanceScorer() = default;
  // Relevance of `product` to `query` in [0, 1].
  virtual double score(std::string_view query, const Product& product) const = 0;
};

// Jaccard similarity of the analyzed query tokens and the product's unique
// tokens. Zero when both are empty.
class JaccardScorer final : public RelevanceScorer {
 public:
  double score(std::string_view query, const Product& product) const override;
};

// Precomputed scores read from {product_id, query, score} records.
// Scoring a pair missing from the table is an error.
class ExternalScoreTable final : public RelevanceScorer {
 public:
  static ExternalScoreTable load(const std::string& path);
  void set(std::string product_id, std::string query, double score);
  double score(std::string_view query, const Product& product) const override;

 private:
  std::map<std::pair<std::string, std::string>, double> scores_;
};

struct RelevanceResult {
  std::vector<EngagementPair> kept;
  std::size_t dropped = 0;
};

// Keeps pairs scoring >= threshold, in input order.
RelevanceResult relevance_filter(std::span<const EngagementPair> pairs,
                                 const Catalog& catalog,
                                 const RelevanceScorer& scorer,
                                 double threshold);

// Default PTF patterns, applied case-insensitively in order.
std::vector<std::string> default_price_patterns();

class PriceFilter {
 public:
  PriceFilter();
  explicit PriceFilter(std::vector<std::string> patterns);

  // Removes every match, repeating until nothing matches, and re-joins the
  // remaining words with single spaces. Idempotent.
  std::string apply(std::string_view query) const;

  const std::vector<std::string>& patterns() const { return patterns_; }

 private:
  std::vector<std::string> patterns_;
  std::vector<std::regex> compiled_;
};

std::string price_token_filter(std::string_view query);

enum class FullMatchDecision { kKeep, kDropFullMatch, kDropEmptyQuery };

// Drops a pair when every analyzed query token is already in the product.
FullMatchDecision full_match_filter(std::span<const std::string> query_tokens,
                                    const TokenSet& product_tokens);

struct NovelTokens {
  // First-occurrence order, no duplicates.
  std::vector<std::string> tokens;
  // occurrences[i] counts tokens[i] within the query, repeats included.
  std::vector<int> occurrences;
};

NovelTokens overlapping_token_filter(std::span<const std::string> query_tokens,
                                     const TokenSet& product_tokens);

struct NovelPair {
  std::string product_id;
  std::vector<std::string> novel_tokens;
  std::vector<int> occurrences;
  std::string source_query;
};

struct StageStats {
  std::string stage;
  std::size_t pairs_in = 0;
  std::size_t pairs_out = 0;
  std::size_t products_out = 0;
  // Pairs removed because their query had no tokens left.
  std::size_t dropped_empty = 0;
  // Queries changed but kept (PTF only).
  std::size_t rewritten = 0;
  // Distinct (product, novel token) pairs emitted (OTF only).
  std::size_t product_token_pairs = 0;
};

struct PipelineStats {
  std::vector<StageStats> stages;

  const StageStats& stage(std::string_view name) const;
  // Sums counters stage by stage. Product counts add correctly only when the
  // two runs covered disjoint product sets.
  PipelineStats& merge(const PipelineStats& other);
  nlohmann::json to_json() const;
  std::string to_table() const;
};

struct PipelineConfig {
  // Null selects JaccardScorer.
  std::shared_ptr<const RelevanceScorer> scorer;
  double rf_threshold = 0.0;
  PriceFilter price_filter;
};

struct PipelineResult {
  // RF + PTF + FMF survivors with the price-cleaned query.
  std::vector<EngagementPair> query_dataset;
  // query_dataset after tokenization and OTF.
  std::vector<NovelPair> token_dataset;
  PipelineStats stats;
};

// Runs RF -> PTF -> FMF -> tokenize + OTF.
PipelineResult run_pipeline(std::span<const EngagementPair> pairs,
                            const Catalog& catalog,
                            const PipelineConfig& config);

void write_novel_pairs(std::ostream& out, std::span<const NovelPair> pairs);
std::vector<NovelPair> load_novel_pairs_file(const std::string& path);

}  // namespace tokexp
