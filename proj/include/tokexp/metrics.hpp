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

// Unigram ROUGE and novel-token ROUGE over products, with novelty
// accounting and percentile bootstrap intervals.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "tokexp/corpus.hpp"
#include "tokexp/predictor.hpp"

namespace tokexp {

struct EvalRecord {
  std::string product_id;
  TokenSet reference;        // held-out query tokens
  TokenSet novel_reference;  // reference minus product tokens
  TokenSet prediction;
};

// Reference multiset from analyzed queries; the novel reference drops every
// token present in `product_tokens`.
EvalRecord make_eval_record(std::string product_id,
                            const TokenSet& product_tokens,
                            std::span<const std::string> reference_queries,
                            std::span<const std::string> predicted_tokens);

// Clipped co-occurrence: sum over reference tokens of
// min(freq in reference, freq in prediction).
std::size_t clipped_matches(const TokenSet& reference,
                            const TokenSet& prediction);

struct RecordScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // False when the reference is empty; such records are excluded from the
  // recall and F1 means.
  bool recall_defined = false;
};

// Empty prediction: precision 1 if the reference is also empty, else 0.
RecordScore score_record(const TokenSet& reference, const TokenSet& prediction);

double f1(double precision, double recall);

struct RougeScores {
  double precision = 0.0;
  double recall = 0.0;
  // Mean of per-record F1 over records with a defined recall.
  double f1 = 0.0;
  std::size_t n_records = 0;
  std::size_t recall_excluded = 0;
};

RougeScores rouge_unigram(std::span<const EvalRecord> records);
RougeScores nrouge(std::span<const EvalRecord> records);

using TokenLookup = std::function<const TokenSet&(std::string_view)>;

struct NoveltyStats {
  double mean_total = 0.0;  // predicted tokens per product
  double mean_novel = 0.0;  // predicted tokens absent from the product
  double pct = 0.0;         // 100 * novel / total
  bool pct_undefined = false;
};

NoveltyStats novelty_stats(std::span<const EvalRecord> records,
                           const TokenLookup& product_tokens);

// Order-independent mean; exact for constant inputs.
double mean(std::span<const double> values);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  friend bool operator==(const Interval&, const Interval&) = default;
};

// Percentile interval of `resamples` bootstrap means.
Interval bootstrap_ci(std::span<const double> values, std::size_t resamples,
                      double level, std::uint64_t seed);

enum class F1Mode { kPerProduct, kFromCorpusMeans };

struct ReportOptions {
  F1Mode f1_mode = F1Mode::kPerProduct;
  std::size_t bootstrap_resamples = 0;  // 0 disables intervals
  double level = 0.95;
  std::uint64_t seed = 0;
};

struct MetricsReport {
  double rouge_precision = 0.0;
  double rouge_recall = 0.0;
  double rouge_f1 = 0.0;
  double nrouge_precision = 0.0;
  double nrouge_recall = 0.0;
  double nrouge_f1 = 0.0;
  double total_tokens = 0.0;
  double novel_tokens = 0.0;
  double novel_pct = 0.0;
  bool novel_pct_undefined = false;
  std::size_t n_products = 0;
  std::size_t rouge_recall_excluded = 0;
  std::size_t nrouge_recall_excluded = 0;
  // Keyed by metric name, e.g. "nrouge_f1".
  std::map<std::string, Interval> intervals;

  nlohmann::json to_json() const;
};

MetricsReport compute_report(std::span<const EvalRecord> records,
                             const TokenLookup& product_tokens,
                             const ReportOptions& options = {});

// An evaluation product with its full scored prediction list, before any
// cutoff is applied.
struct EvalCase {
  std::string product_id;
  TokenSet reference;
  TokenSet novel_reference;
  std::vector<ScoredToken> predictions;
};

EvalRecord apply_cutoff(const EvalCase& eval_case, double cutoff);
std::vector<EvalRecord> apply_cutoff(std::span<const EvalCase> cases,
                                     double cutoff);

// Held-out queries grouped by product id: {product_id, query} records.
std::map<std::string, std::vector<std::string>> load_references_file(
    const std::string& path);

// One case per referenced product, predictions taken from `predictor`
// (top `top_n`). Products missing from the catalog are an input error.
std::vector<EvalCase> build_eval_cases(
    const Catalog& catalog,
    const std::map<std::string, std::vector<std::string>>& references,
    const TokenPredictor& predictor, std::size_t top_n);

}  // namespace tokexp
