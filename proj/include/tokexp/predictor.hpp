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

// Scored-token predictors: a co-occurrence reference model trained on the
// target export, and an adapter serving predictions produced elsewhere.

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tokexp/corpus.hpp"
#include "tokexp/targets.hpp"

namespace tokexp {

struct ScoredToken {
  std::string token;
  double score = 0.0;

  friend bool operator==(const ScoredToken&, const ScoredToken&) = default;
};

// Score descending, then token ascending.
void sort_predictions(std::vector<ScoredToken>& predictions);

class TokenPredictor {
 public:
  virtual ~TokenPredictor() = default;
  // At most n distinct tokens, sorted by sort_predictions.
  virtual std::vector<ScoredToken> predict(const Product& product,
                                           std::size_t n) const = 0;
};

class CooccurrenceModel final : public TokenPredictor {
 public:
  // Adds `amount` to count(context, target) and the context marginal.
  void add(const std::string& context, const std::string& target,
           std::int64_t amount);

  std::int64_t count(std::string_view context, std::string_view target) const;
  std::int64_t marginal(std::string_view context) const;
  const std::map<std::string, std::int64_t, std::less<>>& marginals() const {
    return marginals_;
  }
  std::vector<std::string> vocabulary() const;
  bool empty() const { return counts_.empty(); }

  // score(t) = sum_c count(c, t) / sum_c marginal(c) over the product's
  // unique tokens c, clamped to [0, 1]. Tokens already in the product are
  // never returned.
  std::vector<ScoredToken> predict(const Product& product,
                                   std::size_t n) const override;
  std::vector<ScoredToken> predict(const TokenSet& product_tokens,
                                   std::size_t n) const;

  // {context, target, count} per line, sorted.
  void save(std::ostream& out) const;
  static CooccurrenceModel load(std::istream& in, std::string_view source);
  static CooccurrenceModel load_file(const std::string& path);

  friend bool operator==(const CooccurrenceModel& a,
                         const CooccurrenceModel& b) {
    return a.counts_ == b.counts_ && a.marginals_ == b.marginals_;
  }

 private:
  std::map<std::string, std::map<std::string, std::int64_t, std::less<>>,
           std::less<>>
      counts_;
  std::map<std::string, std::int64_t, std::less<>> marginals_;
};

// Every unique token of the instance's product (looked up in `catalog`)
// receives count += instance frequency toward the instance's target.
CooccurrenceModel train_cooccurrence(std::span<const TrainingInstance> instances,
                                     const Catalog& catalog);

std::vector<ScoredToken> predict_cooccurrence(const CooccurrenceModel& model,
                                              const Product& product,
                                              std::size_t n);

// Lookup predictor over externally produced scores. Every record's text is
// analyzed, so a query-kind record explodes into its tokens, each carrying
// the query's score. Duplicates keep the highest score.
class ExternalPredictions final : public TokenPredictor {
 public:
  void add(const std::string& product_id, std::string_view text, double score);

  std::vector<ScoredToken> predict(const Product& product,
                                   std::size_t n) const override;
  std::vector<ScoredToken> predict(std::string_view product_id,
                                   std::size_t n) const;
  std::vector<std::string> product_ids() const;

  static ExternalPredictions load(std::istream& in, std::string_view source);

 private:
  std::map<std::string, std::map<std::string, double>, std::less<>> scores_;
};

ExternalPredictions load_external_predictions(const std::string& path);

// Writes {product_id, token, score, kind: "token"} records, one per
// prediction, products in the given order.
void write_predictions(
    std::ostream& out,
    std::span<const std::pair<std::string, std::vector<ScoredToken>>> rows);

// Keeps entries with score strictly greater than `cutoff`.
std::vector<ScoredToken> apply_cutoff(std::span<const ScoredToken> predictions,
                                      double cutoff);

}  // namespace tokexp
