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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "tokexp/corpus.hpp"
#include "tokexp/error.hpp"
#include "tokexp/metrics.hpp"

namespace tokexp {
namespace {

using Tokens = std::vector<std::string>;

EvalRecord record(const Tokens& product, const Tokens& reference, const Tokens& prediction,
                  std::string id = "p") {
  EvalRecord r;
  r.product_id = std::move(id);
  TokenSet prod(product);
  for (const auto& t : reference) {
    r.reference.add(t);
    if (!prod.contains(t)) r.novel_reference.add(t);
  }
  for (const auto& t : prediction) r.prediction.add(t);
  return r;
}

struct Fixture {
  std::map<std::string, TokenSet> products;
  std::vector<EvalRecord> records;
  TokenLookup lookup() const {
    return [this](std::string_view id) -> const TokenSet& { return products.at(std::string(id)); };
  }
};

Fixture from_micro(const std::vector<oracle::MicroRecord>& micro) {
  Fixture f;
  for (std::size_t i = 0; i < micro.size(); ++i) {
    std::string id = "p" + std::to_string(i);
    f.products[id] = TokenSet(micro[i].product);
    f.records.push_back(record(micro[i].product, micro[i].reference, micro[i].prediction, id));
  }
  return f;
}

TEST(Rouge, Examples) {
  auto r = score_record(TokenSet(Tokens{"kid", "float", "swim"}), TokenSet(Tokens{"kid", "vest"}));
  EXPECT_DOUBLE_EQ(r.precision, 0.5);
  EXPECT_DOUBLE_EQ(r.recall, 1.0 / 3.0);

  Tokens y{"a", "b", "b", "c"};
  auto same = score_record(TokenSet(y), TokenSet(y));
  EXPECT_EQ(same.precision, 1.0);
  EXPECT_EQ(same.recall, 1.0);

  auto clipped = score_record(TokenSet(Tokens{"kid", "kid"}), TokenSet(Tokens{"kid"}));
  EXPECT_EQ(clipped.precision, 1.0);
  EXPECT_EQ(clipped.recall, 0.5);
}

TEST(Nrouge, Examples) {
  std::vector<EvalRecord> recs{
      record({"swim", "vest"}, {"kid", "swim", "vest", "float"}, {"kid", "boy"})};
  EXPECT_EQ(recs[0].novel_reference, TokenSet(Tokens{"kid", "float"}));
  auto n = nrouge(recs);
  EXPECT_DOUBLE_EQ(n.precision, 0.5);
  EXPECT_DOUBLE_EQ(n.recall, 0.5);

  std::vector<EvalRecord> exact{record({"swim"}, {"kid", "swim", "float"}, {"kid", "float"})};
  EXPECT_EQ(nrouge(exact).precision, 1.0);
  EXPECT_EQ(nrouge(exact).recall, 1.0);

  std::vector<EvalRecord> stale{record({"swim", "vest"}, {"kid", "swim"}, {"swim", "vest"})};
  EXPECT_EQ(nrouge(stale).precision, 0.0);
}

TEST(F1, Examples) {
  EXPECT_DOUBLE_EQ(f1(0.5, 0.5), 0.5);
  EXPECT_EQ(f1(0.0, 0.0), 0.0);
  EXPECT_NEAR(f1(0.409, 0.606), 2 * 0.409 * 0.606 / (0.409 + 0.606), 1e-15);
  EXPECT_NEAR(f1(0.409, 0.606), 0.48838, 1e-5);
}

TEST(F1, PerProductMeanDiffersFromHarmonicMeanOfMeans) {
  std::map<std::string, TokenSet> products{{"a", {}}, {"b", {}}};
  std::vector<EvalRecord> recs{record({}, {"x"}, {"x"}, "a"),
                               record({}, {"x", "y"}, {"q", "r", "s", "x"}, "b")};
  TokenLookup lookup = [&](std::string_view id) -> const TokenSet& {
    return products.at(std::string(id));
  };
  auto per_product = compute_report(recs, lookup);
  ReportOptions corpus;
  corpus.f1_mode = F1Mode::kFromCorpusMeans;
  auto from_means = compute_report(recs, lookup, corpus);
  // Record b: precision 1/4, recall 1/2, F1 1/3.
  EXPECT_DOUBLE_EQ(per_product.rouge_f1, (1.0 + 1.0 / 3.0) / 2);
  EXPECT_DOUBLE_EQ(from_means.rouge_f1, f1(0.625, 0.75));
  EXPECT_NE(per_product.rouge_f1, from_means.rouge_f1);
}

TEST(Rouge, DegenerateDenominators) {
  // Empty prediction: precision 1 against an empty reference, else 0.
  auto both_empty = score_record(TokenSet{}, TokenSet{});
  EXPECT_EQ(both_empty.precision, 1.0);
  EXPECT_FALSE(both_empty.recall_defined);
  auto no_pred = score_record(TokenSet(Tokens{"a"}), TokenSet{});
  EXPECT_EQ(no_pred.precision, 0.0);
  EXPECT_TRUE(no_pred.recall_defined);
  EXPECT_EQ(no_pred.recall, 0.0);

  std::vector<EvalRecord> recs{record({"a"}, {"a"}, {"b"}), record({}, {"c"}, {"c"})};
  auto n = nrouge(recs);
  EXPECT_EQ(n.recall_excluded, 1u);
  EXPECT_EQ(n.recall, 1.0);
  EXPECT_EQ(n.precision, 0.5);
  EXPECT_EQ(n.n_records, 2u);
}

TEST(Metrics, MatchesBruteForceOracle) {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 1000; ++trial) {
    auto micro = oracle::random_micro_records(rng);
    Fixture f = from_micro(micro);
    for (bool novel : {false, true}) {
      auto expected = oracle::corpus_scores(micro, novel);
      auto got = novel ? nrouge(f.records) : rouge_unigram(f.records);
      ASSERT_NEAR(got.precision, expected.precision, 1e-12);
      ASSERT_NEAR(got.recall, expected.recall, 1e-12);
      ASSERT_NEAR(got.f1, expected.f1, 1e-12);
      ASSERT_EQ(got.recall_excluded, expected.excluded);
    }
  }
}

TEST(Metrics, RecordLevelProperties) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 500; ++trial) {
    for (const auto& m : oracle::random_micro_records(rng)) {
      EvalRecord r = record(m.product, m.reference, m.prediction);
      auto full = score_record(r.reference, r.prediction);
      auto nov = score_record(r.novel_reference, r.prediction);
      ASSERT_LE(clipped_matches(r.novel_reference, r.prediction),
                clipped_matches(r.reference, r.prediction));
      if (!r.prediction.empty()) ASSERT_LE(nov.precision, full.precision);
      for (double v : {full.precision, full.recall, nov.precision, nov.recall}) {
        ASSERT_GE(v, 0.0);
        ASSERT_LE(v, 1.0);
      }

      // A token absent from both references lowers precision, keeps recall.
      if (r.prediction.empty()) continue;
      EvalRecord more = r;
      more.prediction.add("zz");
      auto full2 = score_record(more.reference, more.prediction);
      auto nov2 = score_record(more.novel_reference, more.prediction);
      ASSERT_LE(full2.precision, full.precision);
      ASSERT_LE(nov2.precision, nov.precision);
      if (full.precision > 0) ASSERT_LT(full2.precision, full.precision);
      if (nov.precision > 0) ASSERT_LT(nov2.precision, nov.precision);
      ASSERT_EQ(full2.recall, full.recall);
      ASSERT_EQ(nov2.recall, nov.recall);
    }
  }
}

TEST(Metrics, CorpusMeansArePermutationInvariant) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    Fixture f = from_micro(oracle::random_micro_records(rng));
    auto before = compute_report(f.records, f.lookup()).to_json();
    std::shuffle(f.records.begin(), f.records.end(), rng);
    ASSERT_EQ(compute_report(f.records, f.lookup()).to_json(), before);
  }
}

TEST(Mean, ExactForConstantsAndOrderIndependent) {
  std::vector<double> c(1000, 0.1);
  EXPECT_EQ(mean(c), 0.1);
  std::vector<double> v{0.1, 0.7, 1e-9, 0.3333, 0.9};
  double m = mean(v);
  std::reverse(v.begin(), v.end());
  EXPECT_EQ(mean(v), m);
  EXPECT_NEAR(m, (0.1 + 0.7 + 1e-9 + 0.3333 + 0.9) / 5, 1e-15);
  EXPECT_EQ(mean(std::vector<double>{}), 0.0);
}

TEST(NoveltyStats, Examples) {
  std::map<std::string, TokenSet> products{{"p", TokenSet(Tokens{"swim", "vest"})}};
  TokenLookup lookup = [&](std::string_view id) -> const TokenSet& {
    return products.at(std::string(id));
  };
  std::vector<EvalRecord> half{record({"swim", "vest"}, {"kid"}, {"kid", "swim"})};
  auto s = novelty_stats(half, lookup);
  EXPECT_EQ(s.mean_total, 2.0);
  EXPECT_EQ(s.mean_novel, 1.0);
  EXPECT_EQ(s.pct, 50.0);

  std::vector<EvalRecord> all{record({"swim", "vest"}, {"kid"}, {"kid", "float"})};
  EXPECT_EQ(novelty_stats(all, lookup).pct, 100.0);

  std::vector<EvalRecord> none{record({"swim", "vest"}, {"kid"}, {})};
  auto empty = novelty_stats(none, lookup);
  EXPECT_EQ(empty.mean_total, 0.0);
  EXPECT_EQ(empty.pct, 0.0);
  EXPECT_TRUE(empty.pct_undefined);
}

TEST(Bootstrap, ConstantValuesGiveZeroWidth) {
  std::vector<double> c(250, 0.37);
  auto iv = bootstrap_ci(c, 1000, 0.95, 5);
  EXPECT_EQ(iv.lo, 0.37);
  EXPECT_EQ(iv.hi, 0.37);
}

TEST(Bootstrap, DeterministicGivenSeed) {
  std::mt19937_64 rng(2);
  std::vector<double> v(300);
  for (auto& x : v) x = static_cast<double>(rng() % 1000) / 1000.0;
  EXPECT_EQ(bootstrap_ci(v, 500, 0.9, 11), bootstrap_ci(v, 500, 0.9, 11));
  EXPECT_NE(bootstrap_ci(v, 500, 0.9, 11), bootstrap_ci(v, 500, 0.9, 12));
  auto iv = bootstrap_ci(v, 500, 0.9, 11);
  EXPECT_LE(iv.lo, mean(v));
  EXPECT_GE(iv.hi, mean(v));
}

TEST(Bootstrap, RejectsBadArguments) {
  std::vector<double> v{1.0, 2.0};
  EXPECT_THROW(bootstrap_ci({}, 10, 0.95, 1), ConfigError);
  EXPECT_THROW(bootstrap_ci(v, 0, 0.95, 1), ConfigError);
  EXPECT_THROW(bootstrap_ci(v, 10, 1.0, 1), ConfigError);
  EXPECT_THROW(bootstrap_ci(v, 10, 0.0, 1), ConfigError);
}

TEST(Report, IntervalsAndFields) {
  std::mt19937_64 rng(9);
  Fixture f = from_micro(oracle::random_micro_records(rng));
  ReportOptions opts;
  opts.bootstrap_resamples = 200;
  opts.seed = 4;
  auto report = compute_report(f.records, f.lookup(), opts);
  for (const char* key : {"rouge_precision", "rouge_recall", "rouge_f1", "nrouge_precision",
                          "nrouge_recall", "nrouge_f1"}) {
    ASSERT_TRUE(report.intervals.count(key)) << key;
    EXPECT_LE(report.intervals[key].lo, report.intervals[key].hi);
  }
  EXPECT_LE(report.novel_tokens, report.total_tokens);
  EXPECT_EQ(report.n_products, f.records.size());
  auto j = report.to_json();
  for (const char* key : {"rouge_precision", "nrouge_f1", "total_tokens", "novel_tokens",
                          "novel_pct", "n_products", "intervals"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_TRUE(compute_report(f.records, f.lookup()).intervals.empty());
}

TEST(EvalRecords, BuiltFromQueries) {
  TokenSet product(Tokens{"swim", "vest"});
  std::vector<std::string> refs{"Swim vest for kids", "kids float"};
  std::vector<std::string> preds{"kid", "pool"};
  auto r = make_eval_record("p", product, refs, preds);
  EXPECT_EQ(r.reference, TokenSet(Tokens{"swim", "vest", "for", "kid", "kid", "float"}));
  EXPECT_EQ(r.novel_reference, TokenSet(Tokens{"for", "kid", "kid", "float"}));
  EXPECT_EQ(r.prediction, TokenSet(Tokens{"kid", "pool"}));

  EvalCase c{"p", r.reference, r.novel_reference, {{"kid", 0.9}, {"pool", 0.2}}};
  EXPECT_EQ(apply_cutoff(c, 0.5).prediction, TokenSet(Tokens{"kid"}));
  EXPECT_EQ(apply_cutoff(c, 0.0).prediction.size(), 2u);
}

}  // namespace
}  // namespace tokexp
