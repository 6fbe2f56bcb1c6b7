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

#include "tokexp/predictor.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <set>

#include "tokexp/error.hpp"
#include "tokexp/jsonl.hpp"

namespace tokexp {

void sort_predictions(std::vector<ScoredToken>& predictions) {
  std::sort(predictions.begin(), predictions.end(),
            [](const ScoredToken& a, const ScoredToken& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.token < b.token;
            });
}

namespace {

void truncate_sorted(std::vector<ScoredToken>& v, std::size_t n) {
  sort_predictions(v);
  if (v.size() > n) v.resize(n);
}

void require_positive_n(std::size_t n) {
  if (n < 1) throw ConfigError("prediction count n must be >= 1");
}

}  // namespace

void CooccurrenceModel::add(const std::string& context,
                            const std::string& target, std::int64_t amount) {
  if (amount <= 0) return;
  counts_[context][target] += amount;
  marginals_[context] += amount;
}

std::int64_t CooccurrenceModel::count(std::string_view context,
                                      std::string_view target) const {
  auto c = counts_.find(context);
  if (c == counts_.end()) return 0;
  auto t = c->second.find(target);
  return t == c->second.end() ? 0 : t->second;
}

std::int64_t CooccurrenceModel::marginal(std::string_view context) const {
  auto it = marginals_.find(context);
  return it == marginals_.end() ? 0 : it->second;
}

std::vector<std::string> CooccurrenceModel::vocabulary() const {
  std::set<std::string> vocab;
  for (const auto& [context, targets] : counts_) {
    for (const auto& [target, n] : targets) vocab.insert(target);
  }
  return {vocab.begin(), vocab.end()};
}

std::vector<ScoredToken> CooccurrenceModel::predict(const Product& product,
                                                    std::size_t n) const {
  return predict(product_token_set(product), n);
}

std::vector<ScoredToken> CooccurrenceModel::predict(
    const TokenSet& product_tokens, std::size_t n) const {
  require_positive_n(n);
  std::map<std::string, std::int64_t> numerators;
  std::int64_t denominator = 0;
  for (const auto& [context, unused] : product_tokens.counts()) {
    auto c = counts_.find(context);
    if (c == counts_.end()) continue;
    denominator += marginals_.find(context)->second;
    for (const auto& [target, k] : c->second) numerators[target] += k;
  }
  std::vector<ScoredToken> out;
  if (denominator == 0) return out;
  for (const auto& [target, k] : numerators) {
    if (product_tokens.contains(target)) continue;
    double s = static_cast<double>(k) / static_cast<double>(denominator);
    out.push_back({target, std::clamp(s, 0.0, 1.0)});
  }
  truncate_sorted(out, n);
  return out;
}

void CooccurrenceModel::save(std::ostream& out) const {
  for (const auto& [context, targets] : counts_) {
    for (const auto& [target, n] : targets) {
      io::write_line(out, {{"context", context}, {"target", target}, {"count", n}});
    }
  }
}

CooccurrenceModel CooccurrenceModel::load(std::istream& in,
                                          std::string_view source) {
  CooccurrenceModel model;
  io::for_each_record(in, source, [&](const io::Json& r, std::size_t line) {
    long long n = io::require_integer(r, "count", source, line);
    if (n <= 0) {
      throw InputError(std::string(source) + ":" + std::to_string(line) +
                       ": co-occurrence count must be positive");
    }
    model.add(io::require_string(r, "context", source, line),
              io::require_string(r, "target", source, line), n);
  });
  return model;
}

CooccurrenceModel CooccurrenceModel::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open model file: " + path);
  return load(in, path);
}

CooccurrenceModel train_cooccurrence(std::span<const TrainingInstance> instances,
                                     const Catalog& catalog) {
  CooccurrenceModel model;
  for (const auto& inst : instances) {
    const TokenSet& context = catalog.tokens(inst.product_id);
    for (const auto& [c, unused] : context.counts()) {
      model.add(c, inst.target.token, inst.target.frequency);
    }
  }
  return model;
}

std::vector<ScoredToken> predict_cooccurrence(const CooccurrenceModel& model,
                                              const Product& product,
                                              std::size_t n) {
  return model.predict(product, n);
}

void ExternalPredictions::add(const std::string& product_id,
                              std::string_view text, double score) {
  if (!(score >= 0.0 && score <= 1.0)) {
    throw InputError("prediction score outside [0, 1]");
  }
  std::vector<std::string> tokens = analyze(text);
  auto& by_token = scores_[product_id];
  for (auto& t : tokens) {
    auto [it, inserted] = by_token.emplace(std::move(t), score);
    if (!inserted) it->second = std::max(it->second, score);
  }
}

std::vector<ScoredToken> ExternalPredictions::predict(const Product& product,
                                                      std::size_t n) const {
  return predict(product.id, n);
}

std::vector<ScoredToken> ExternalPredictions::predict(
    std::string_view product_id, std::size_t n) const {
  require_positive_n(n);
  std::vector<ScoredToken> out;
  auto it = scores_.find(product_id);
  if (it == scores_.end()) return out;
  out.reserve(it->second.size());
  for (const auto& [token, s] : it->second) out.push_back({token, s});
  truncate_sorted(out, n);
  return out;
}

std::vector<std::string> ExternalPredictions::product_ids() const {
  std::vector<std::string> ids;
  ids.reserve(scores_.size());
  for (const auto& [id, unused] : scores_) ids.push_back(id);
  return ids;
}

ExternalPredictions ExternalPredictions::load(std::istream& in,
                                              std::string_view source) {
  ExternalPredictions preds;
  io::for_each_record(in, source, [&](const io::Json& r, std::size_t line) {
    auto where = [&] { return std::string(source) + ":" + std::to_string(line); };
    std::string kind_name = io::optional_string(r, "kind", source, line);
    if (!kind_name.empty() && kind_name != "token" && kind_name != "query") {
      throw InputError(where() + ": unknown prediction kind '" + kind_name + "'");
    }
    std::string text;
    for (const char* key : {"token", "query", "text"}) {
      if (r.contains(key)) {
        text = io::require_string(r, key, source, line);
        break;
      }
    }
    if (text.empty()) throw InputError(where() + ": missing prediction text");
    double score = io::require_number(r, "score", source, line);
    if (!(score >= 0.0 && score <= 1.0)) {
      throw InputError(where() + ": prediction score outside [0, 1]");
    }
    preds.add(io::require_string(r, "product_id", source, line), text, score);
  });
  return preds;
}

ExternalPredictions load_external_predictions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open predictions file: " + path);
  return ExternalPredictions::load(in, path);
}

void write_predictions(
    std::ostream& out,
    std::span<const std::pair<std::string, std::vector<ScoredToken>>> rows) {
  for (const auto& [product_id, preds] : rows) {
    for (const auto& p : preds) {
      io::write_line(out, {{"product_id", product_id},
                           {"token", p.token},
                           {"score", p.score},
                           {"kind", "token"}});
    }
  }
}

std::vector<ScoredToken> apply_cutoff(std::span<const ScoredToken> predictions,
                                      double cutoff) {
  std::vector<ScoredToken> out;
  for (const auto& p : predictions) {
    if (p.score > cutoff) out.push_back(p);
  }
  return out;
}

}  // namespace tokexp
