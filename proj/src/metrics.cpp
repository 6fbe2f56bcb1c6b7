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

#include "tokexp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "tokexp/error.hpp"
#include "tokexp/jsonl.hpp"

namespace tokexp {

EvalRecord make_eval_record(std::string product_id,
                            const TokenSet& product_tokens,
                            std::span<const std::string> reference_queries,
                            std::span<const std::string> predicted_tokens) {
  EvalRecord r;
  r.product_id = std::move(product_id);
  for (const auto& q : reference_queries) {
    for (const auto& t : analyze(q)) {
      r.reference.add(t);
      if (!product_tokens.contains(t)) r.novel_reference.add(t);
    }
  }
  for (const auto& t : predicted_tokens) r.prediction.add(t);
  return r;
}

std::size_t clipped_matches(const TokenSet& reference,
                            const TokenSet& prediction) {
  std::size_t matched = 0;
  for (const auto& [token, n] : reference.counts()) {
    matched += static_cast<std::size_t>(std::min(n, prediction.count(token)));
  }
  return matched;
}

double f1(double precision, double recall) {
  double sum = precision + recall;
  return sum > 0.0 ? 2.0 * precision * recall / sum : 0.0;
}

RecordScore score_record(const TokenSet& reference,
                         const TokenSet& prediction) {
  RecordScore s;
  const auto matched = static_cast<double>(clipped_matches(reference, prediction));
  if (prediction.empty()) {
    s.precision = reference.empty() ? 1.0 : 0.0;
  } else {
    s.precision = matched / static_cast<double>(prediction.size());
  }
  s.recall_defined = !reference.empty();
  if (s.recall_defined) {
    s.recall = matched / static_cast<double>(reference.size());
    s.f1 = f1(s.precision, s.recall);
  }
  return s;
}

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double base = sorted.front();
  double offset = 0.0;
  for (double v : sorted) offset += v - base;
  return base + offset / static_cast<double>(sorted.size());
}

namespace {

struct PerRecord {
  std::vector<double> precision;
  std::vector<double> recall;
  std::vector<double> f1;
  std::size_t excluded = 0;
};

template <typename ReferenceOf>
PerRecord per_record(std::span<const EvalRecord> records, ReferenceOf ref) {
  PerRecord out;
  for (const auto& r : records) {
    RecordScore s = score_record(ref(r), r.prediction);
    out.precision.push_back(s.precision);
    if (s.recall_defined) {
      out.recall.push_back(s.recall);
      out.f1.push_back(s.f1);
    } else {
      ++out.excluded;
    }
  }
  return out;
}

RougeScores summarize(const PerRecord& p, std::size_t n) {
  RougeScores s;
  s.precision = mean(p.precision);
  s.recall = mean(p.recall);
  s.f1 = mean(p.f1);
  s.n_records = n;
  s.recall_excluded = p.excluded;
  return s;
}

const TokenSet& full_reference(const EvalRecord& r) { return r.reference; }
const TokenSet& novel_reference(const EvalRecord& r) { return r.novel_reference; }

}  // namespace

RougeScores rouge_unigram(std::span<const EvalRecord> records) {
  return summarize(per_record(records, full_reference), records.size());
}

RougeScores nrouge(std::span<const EvalRecord> records) {
  return summarize(per_record(records, novel_reference), records.size());
}

NoveltyStats novelty_stats(std::span<const EvalRecord> records,
                           const TokenLookup& product_tokens) {
  NoveltyStats s;
  if (records.empty()) {
    s.pct_undefined = true;
    return s;
  }
  std::size_t total = 0;
  std::size_t novel = 0;
  for (const auto& r : records) {
    const TokenSet& product = product_tokens(r.product_id);
    total += r.prediction.size();
    for (const auto& [token, n] : r.prediction.counts()) {
      if (!product.contains(token)) novel += static_cast<std::size_t>(n);
    }
  }
  const auto n = static_cast<double>(records.size());
  s.mean_total = static_cast<double>(total) / n;
  s.mean_novel = static_cast<double>(novel) / n;
  if (total == 0) {
    s.pct_undefined = true;
  } else {
    s.pct = 100.0 * static_cast<double>(novel) / static_cast<double>(total);
  }
  return s;
}

Interval bootstrap_ci(std::span<const double> values, std::size_t resamples,
                      double level, std::uint64_t seed) {
  if (values.empty()) throw ConfigError("bootstrap needs at least one value");
  if (resamples < 1) throw ConfigError("bootstrap needs at least one resample");
  if (!(level > 0.0 && level < 1.0)) {
    throw ConfigError("bootstrap level must be in (0, 1)");
  }
  const std::size_t n = values.size();
  const double base = *std::min_element(values.begin(), values.end());
  std::mt19937_64 rng(seed);
  std::vector<double> means(resamples);
  for (auto& m : means) {
    double offset = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      offset += values[static_cast<std::size_t>(rng() % n)] - base;
    }
    m = base + offset / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());

  auto quantile = [&](double q) {
    double h = q * static_cast<double>(resamples - 1);
    auto i = static_cast<std::size_t>(std::floor(h));
    if (i + 1 >= resamples) return means.back();
    double frac = h - static_cast<double>(i);
    return means[i] + frac * (means[i + 1] - means[i]);
  };
  const double tail = (1.0 - level) / 2.0;
  return {quantile(tail), quantile(1.0 - tail)};
}

MetricsReport compute_report(std::span<const EvalRecord> records,
                             const TokenLookup& product_tokens,
                             const ReportOptions& options) {
  PerRecord full = per_record(records, full_reference);
  PerRecord novel = per_record(records, novel_reference);
  RougeScores rouge = summarize(full, records.size());
  RougeScores nr = summarize(novel, records.size());

  MetricsReport report;
  report.rouge_precision = rouge.precision;
  report.rouge_recall = rouge.recall;
  report.nrouge_precision = nr.precision;
  report.nrouge_recall = nr.recall;
  if (options.f1_mode == F1Mode::kPerProduct) {
    report.rouge_f1 = rouge.f1;
    report.nrouge_f1 = nr.f1;
  } else {
    report.rouge_f1 = f1(rouge.precision, rouge.recall);
    report.nrouge_f1 = f1(nr.precision, nr.recall);
  }
  report.n_products = records.size();
  report.rouge_recall_excluded = rouge.recall_excluded;
  report.nrouge_recall_excluded = nr.recall_excluded;

  NoveltyStats ns = novelty_stats(records, product_tokens);
  report.total_tokens = ns.mean_total;
  report.novel_tokens = ns.mean_novel;
  report.novel_pct = ns.pct;
  report.novel_pct_undefined = ns.pct_undefined;

  if (options.bootstrap_resamples > 0) {
    const std::pair<const char*, const std::vector<double>*> series[] = {
        {"rouge_precision", &full.precision}, {"rouge_recall", &full.recall},
        {"rouge_f1", &full.f1},               {"nrouge_precision", &novel.precision},
        {"nrouge_recall", &novel.recall},     {"nrouge_f1", &novel.f1},
    };
    for (const auto& [name, values] : series) {
      if (values->empty()) continue;
      report.intervals[name] = bootstrap_ci(*values, options.bootstrap_resamples,
                                            options.level, options.seed);
    }
  }
  return report;
}

nlohmann::json MetricsReport::to_json() const {
  nlohmann::json j = {
      {"rouge_precision", rouge_precision},
      {"rouge_recall", rouge_recall},
      {"rouge_f1", rouge_f1},
      {"nrouge_precision", nrouge_precision},
      {"nrouge_recall", nrouge_recall},
      {"nrouge_f1", nrouge_f1},
      {"total_tokens", total_tokens},
      {"novel_tokens", novel_tokens},
      {"novel_pct", novel_pct},
      {"novel_pct_undefined", novel_pct_undefined},
      {"n_products", n_products},
      {"rouge_recall_excluded", rouge_recall_excluded},
      {"nrouge_recall_excluded", nrouge_recall_excluded},
  };
  nlohmann::json ci = nlohmann::json::object();
  for (const auto& [name, iv] : intervals) ci[name] = {iv.lo, iv.hi};
  j["intervals"] = ci;
  return j;
}

EvalRecord apply_cutoff(const EvalCase& eval_case, double cutoff) {
  EvalRecord r;
  r.product_id = eval_case.product_id;
  r.reference = eval_case.reference;
  r.novel_reference = eval_case.novel_reference;
  for (const auto& p : eval_case.predictions) {
    if (p.score > cutoff) r.prediction.add(p.token);
  }
  return r;
}

std::vector<EvalRecord> apply_cutoff(std::span<const EvalCase> cases,
                                     double cutoff) {
  std::vector<EvalRecord> out;
  out.reserve(cases.size());
  for (const auto& c : cases) out.push_back(apply_cutoff(c, cutoff));
  return out;
}

std::map<std::string, std::vector<std::string>> load_references_file(
    const std::string& path) {
  std::map<std::string, std::vector<std::string>> refs;
  io::for_each_record_in_file(path, [&](const io::Json& r, std::size_t line) {
    refs[io::require_string(r, "product_id", path, line)].push_back(
        io::require_string(r, "query", path, line));
  });
  return refs;
}

std::vector<EvalCase> build_eval_cases(
    const Catalog& catalog,
    const std::map<std::string, std::vector<std::string>>& references,
    const TokenPredictor& predictor, std::size_t top_n) {
  std::vector<EvalCase> cases;
  cases.reserve(references.size());
  for (const auto& [id, queries] : references) {
    const Product& product = catalog.at(id);
    EvalRecord base = make_eval_record(id, catalog.tokens(id), queries, {});
    cases.push_back({id, std::move(base.reference),
                     std::move(base.novel_reference),
                     predictor.predict(product, top_n)});
  }
  return cases;
}

}  // namespace tokexp
