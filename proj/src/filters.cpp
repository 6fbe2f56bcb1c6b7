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

#include "tokexp/filters.hpp"

#include <algorithm>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "tokexp/error.hpp"
#include "tokexp/jsonl.hpp"

namespace tokexp {

double JaccardScorer::score(std::string_view query,
                            const Product& product) const {
  std::vector<std::string> q = analyze(query);
  std::set<std::string> query_set(q.begin(), q.end());
  TokenSet product_tokens = product_token_set(product);
  std::size_t intersection = 0;
  for (const auto& t : query_set) {
    if (product_tokens.contains(t)) ++intersection;
  }
  std::size_t union_size =
      query_set.size() + product_tokens.unique_size() - intersection;
  if (union_size == 0) return 0.0;
  return static_cast<double>(intersection) / static_cast<double>(union_size);
}

ExternalScoreTable ExternalScoreTable::load(const std::string& path) {
  ExternalScoreTable table;
  io::for_each_record_in_file(path, [&](const io::Json& r, std::size_t line) {
    double s = io::require_number(r, "score", path, line);
    if (!(s >= 0.0 && s <= 1.0)) {
      throw InputError(path + ":" + std::to_string(line) +
                       ": relevance score outside [0, 1]");
    }
    table.set(io::require_string(r, "product_id", path, line),
              io::require_string(r, "query", path, line), s);
  });
  return table;
}

void ExternalScoreTable::set(std::string product_id, std::string query,
                             double score) {
  scores_[{std::move(product_id), std::move(query)}] = score;
}

double ExternalScoreTable::score(std::string_view query,
                                 const Product& product) const {
  auto it = scores_.find({product.id, std::string(query)});
  if (it == scores_.end()) {
    throw InputError("no relevance score for pair (" + product.id + ", \"" +
                     std::string(query) + "\")");
  }
  return it->second;
}

RelevanceResult relevance_filter(std::span<const EngagementPair> pairs,
                                 const Catalog& catalog,
                                 const RelevanceScorer& scorer,
                                 double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw ConfigError("relevance threshold must be in [0, 1]");
  }
  RelevanceResult result;
  for (const auto& pair : pairs) {
    const Product& product = catalog.at(pair.product_id);
    double s = 0.0;
    try {
      s = scorer.score(pair.query, product);
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      throw InputError("relevance scorer failed on pair (" + pair.product_id +
                       ", \"" + pair.query + "\"): " + e.what());
    }
    if (!(s >= 0.0 && s <= 1.0)) {
      throw InputError("relevance score outside [0, 1] for pair (" +
                       pair.product_id + ", \"" + pair.query + "\")");
    }
    if (s >= threshold) {
      result.kept.push_back(pair);
    } else {
      ++result.dropped;
    }
  }
  return result;
}

std::vector<std::string> default_price_patterns() {
  const std::string amount =
      R"((?:\$\s*\d+(?:[.,]\d+)*(?:\s*(?:dollars?|bucks|usd)\b)?|\d+(?:[.,]\d+)*(?:\s*(?:dollars?|bucks|usd)\b)?))";
  return {
      R"(\b(?:under|over|below|above|less than|around|about)\s+)" + amount,
      R"(\$\s*\d+(?:[.,]\d+)*(?:\s*(?:dollars?|bucks|usd)\b)?)",
      R"(\b\d+(?:[.,]\d+)*\s*(?:dollars?|bucks|usd)\b)",
      R"(\bon sale\b)",
      R"(\bclearance\b)",
      R"(\bcheap(?:er|est)?\b)",
      R"(\bdiscount(?:s|ed)?\b)",
      R"(\bdeals?\b)",
      R"(\bcoupons?\b)",
  };
}

PriceFilter::PriceFilter() : PriceFilter(default_price_patterns()) {}

PriceFilter::PriceFilter(std::vector<std::string> patterns)
    : patterns_(std::move(patterns)) {
  compiled_.reserve(patterns_.size());
  for (const auto& p : patterns_) {
    try {
      compiled_.emplace_back(p, std::regex::ECMAScript | std::regex::icase);
    } catch (const std::regex_error& e) {
      throw ConfigError("invalid price pattern '" + p + "': " + e.what());
    }
  }
}

namespace {

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  std::istringstream in{std::string(s)};
  std::string word;
  while (in >> word) {
    if (!out.empty()) out.push_back(' ');
    out += word;
  }
  return out;
}

}  // namespace

std::string PriceFilter::apply(std::string_view query) const {
  std::string current = collapse_whitespace(query);
  while (true) {
    std::string next = current;
    for (const auto& re : compiled_) next = std::regex_replace(next, re, " ");
    next = collapse_whitespace(next);
    if (next == current) return current;
    current = std::move(next);
  }
}

std::string price_token_filter(std::string_view query) {
  static const PriceFilter kDefault;
  return kDefault.apply(query);
}

FullMatchDecision full_match_filter(std::span<const std::string> query_tokens,
                                    const TokenSet& product_tokens) {
  if (query_tokens.empty()) return FullMatchDecision::kDropEmptyQuery;
  for (const auto& t : query_tokens) {
    if (!product_tokens.contains(t)) return FullMatchDecision::kKeep;
  }
  return FullMatchDecision::kDropFullMatch;
}

NovelTokens overlapping_token_filter(std::span<const std::string> query_tokens,
                                     const TokenSet& product_tokens) {
  NovelTokens out;
  for (const auto& t : query_tokens) {
    if (product_tokens.contains(t)) continue;
    auto it = std::find(out.tokens.begin(), out.tokens.end(), t);
    if (it == out.tokens.end()) {
      out.tokens.push_back(t);
      out.occurrences.push_back(1);
    } else {
      ++out.occurrences[static_cast<std::size_t>(it - out.tokens.begin())];
    }
  }
  return out;
}

const StageStats& PipelineStats::stage(std::string_view name) const {
  for (const auto& s : stages) {
    if (s.stage == name) return s;
  }
  throw InternalError("no pipeline stage named " + std::string(name));
}

PipelineStats& PipelineStats::merge(const PipelineStats& other) {
  if (stages.empty()) {
    stages = other.stages;
    return *this;
  }
  if (other.stages.size() != stages.size()) {
    throw InternalError("cannot merge pipeline stats with different stages");
  }
  for (std::size_t i = 0; i < stages.size(); ++i) {
    StageStats& a = stages[i];
    const StageStats& b = other.stages[i];
    if (a.stage != b.stage) {
      throw InternalError("cannot merge pipeline stats with different stages");
    }
    a.pairs_in += b.pairs_in;
    a.pairs_out += b.pairs_out;
    a.products_out += b.products_out;
    a.dropped_empty += b.dropped_empty;
    a.rewritten += b.rewritten;
    a.product_token_pairs += b.product_token_pairs;
  }
  return *this;
}

nlohmann::json PipelineStats::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& s : stages) {
    rows.push_back({{"stage", s.stage},
                    {"pairs_in", s.pairs_in},
                    {"pairs_out", s.pairs_out},
                    {"products_out", s.products_out},
                    {"dropped_empty", s.dropped_empty},
                    {"rewritten", s.rewritten},
                    {"product_token_pairs", s.product_token_pairs}});
  }
  return rows;
}

std::string PipelineStats::to_table() const {
  std::ostringstream out;
  out << std::left << std::setw(8) << "stage" << std::right << std::setw(12)
      << "pairs_in" << std::setw(12) << "pairs_out" << std::setw(12)
      << "products" << std::setw(16) << "product_tokens" << '\n';
  for (const auto& s : stages) {
    out << std::left << std::setw(8) << s.stage << std::right << std::setw(12)
        << s.pairs_in << std::setw(12) << s.pairs_out << std::setw(12)
        << s.products_out << std::setw(16);
    if (s.stage == "OTF") {
      out << s.product_token_pairs;
    } else {
      out << "";
    }
    out << '\n';
  }
  return out.str();
}

namespace {

template <typename Range, typename IdOf>
std::size_t distinct_products(const Range& range, IdOf id_of) {
  std::unordered_set<std::string> ids;
  for (const auto& item : range) ids.insert(id_of(item));
  return ids.size();
}

std::size_t distinct_pair_products(std::span<const EngagementPair> pairs) {
  return distinct_products(
      pairs, [](const EngagementPair& p) -> const std::string& {
        return p.product_id;
      });
}

}  // namespace

PipelineResult run_pipeline(std::span<const EngagementPair> pairs,
                            const Catalog& catalog,
                            const PipelineConfig& config) {
  for (const auto& p : pairs) {
    if (!catalog.contains(p.product_id)) {
      throw InputError("engagement pair references unknown product: " +
                       p.product_id);
    }
  }
  PipelineResult result;
  auto& stages = result.stats.stages;

  stages.push_back({"input", pairs.size(), pairs.size(),
                    distinct_pair_products(pairs)});

  JaccardScorer default_scorer;
  const RelevanceScorer& scorer =
      config.scorer ? *config.scorer : default_scorer;
  RelevanceResult rf =
      relevance_filter(pairs, catalog, scorer, config.rf_threshold);
  stages.push_back({"RF", pairs.size(), rf.kept.size(),
                    distinct_pair_products(rf.kept)});

  std::vector<EngagementPair> cleaned;
  StageStats ptf{"PTF", rf.kept.size()};
  for (auto& pair : rf.kept) {
    std::string q = config.price_filter.apply(pair.query);
    if (normalize(q).empty()) {
      ++ptf.dropped_empty;
      continue;
    }
    if (q != pair.query) ++ptf.rewritten;
    pair.query = std::move(q);
    cleaned.push_back(std::move(pair));
  }
  ptf.pairs_out = cleaned.size();
  ptf.products_out = distinct_pair_products(cleaned);
  stages.push_back(ptf);

  StageStats fmf{"FMF", cleaned.size()};
  std::vector<std::vector<std::string>> kept_tokens;
  for (auto& pair : cleaned) {
    std::vector<std::string> tokens = analyze(pair.query);
    switch (full_match_filter(tokens, catalog.tokens(pair.product_id))) {
      case FullMatchDecision::kKeep:
        result.query_dataset.push_back(std::move(pair));
        kept_tokens.push_back(std::move(tokens));
        break;
      case FullMatchDecision::kDropEmptyQuery:
        ++fmf.dropped_empty;
        break;
      case FullMatchDecision::kDropFullMatch:
        break;
    }
  }
  fmf.pairs_out = result.query_dataset.size();
  fmf.products_out = distinct_pair_products(result.query_dataset);
  stages.push_back(fmf);

  StageStats otf{"OTF", result.query_dataset.size()};
  std::set<std::pair<std::string, std::string>> product_tokens;
  for (std::size_t i = 0; i < result.query_dataset.size(); ++i) {
    const EngagementPair& pair = result.query_dataset[i];
    NovelTokens novel =
        overlapping_token_filter(kept_tokens[i], catalog.tokens(pair.product_id));
    if (novel.tokens.empty()) {
      ++otf.dropped_empty;
      continue;
    }
    for (const auto& t : novel.tokens) product_tokens.emplace(pair.product_id, t);
    result.token_dataset.push_back({pair.product_id, std::move(novel.tokens),
                                    std::move(novel.occurrences), pair.query});
  }
  otf.pairs_out = result.token_dataset.size();
  otf.products_out = distinct_products(
      result.token_dataset,
      [](const NovelPair& p) -> const std::string& { return p.product_id; });
  otf.product_token_pairs = product_tokens.size();
  stages.push_back(otf);

  return result;
}

void write_novel_pairs(std::ostream& out, std::span<const NovelPair> pairs) {
  for (const auto& p : pairs) {
    io::Json r;
    r["product_id"] = p.product_id;
    r["novel_tokens"] = p.novel_tokens;
    r["occurrences"] = p.occurrences;
    r["source_query"] = p.source_query;
    io::write_line(out, r);
  }
}

std::vector<NovelPair> load_novel_pairs_file(const std::string& path) {
  std::vector<NovelPair> pairs;
  io::for_each_record_in_file(path, [&](const io::Json& r, std::size_t line) {
    NovelPair p;
    p.product_id = io::require_string(r, "product_id", path, line);
    p.source_query = io::optional_string(r, "source_query", path, line);
    try {
      p.novel_tokens = r.at("novel_tokens").get<std::vector<std::string>>();
      p.occurrences = r.at("occurrences").get<std::vector<int>>();
    } catch (const io::Json::exception& e) {
      throw InputError(path + ":" + std::to_string(line) + ": " + e.what());
    }
    if (p.novel_tokens.empty() ||
        p.novel_tokens.size() != p.occurrences.size()) {
      throw InputError(path + ":" + std::to_string(line) +
                       ": novel_tokens must be non-empty and match occurrences");
    }
    pairs.push_back(std::move(p));
  });
  return pairs;
}

}  // namespace tokexp
