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
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "tokexp/corpus.hpp"
#include "tokexp/cutoff.hpp"
#include "tokexp/error.hpp"
#include "tokexp/metrics.hpp"

namespace tokexp {
namespace {

using Tokens = std::vector<std::string>;

const TokenSet& no_tokens(std::string_view) {
  static const TokenSet empty;
  return empty;
}

EvalCase make_case(std::string id, const Tokens& novel_ref, std::vector<ScoredToken> preds) {
  TokenSet ref(novel_ref);
  sort_predictions(preds);
  return EvalCase{std::move(id), ref, ref, std::move(preds)};
}

// Independent nROUGE F1 over the retained predictions of every case.
double oracle_nrouge_f1(const std::vector<EvalCase>& cases, double cutoff) {
  std::vector<oracle::MicroRecord> micro;
  for (const auto& c : cases) {
    oracle::MicroRecord m;
    for (const auto& [t, n] : c.novel_reference.counts()) m.reference.insert(m.reference.end(), n, t);
    for (const auto& p : c.predictions) {
      if (p.score > cutoff) m.prediction.push_back(p.token);
    }
    micro.push_back(m);
  }
  return oracle::corpus_scores(micro, false).f1;
}

TEST(TuneCutoff, ExcludesWrongLowScorer) {
  std::vector<EvalCase> cases{make_case("p", {"a", "b"}, {{"a", 0.9}, {"b", 0.5}, {"x", 0.2}})};
  auto sweep = tune_cutoff(cases, no_tokens);
  EXPECT_EQ(sweep.chosen, 0.2);
  EXPECT_EQ(sweep.chosen_row().report.nrouge_f1, 1.0);
  for (double c : {0.0, 0.2, 0.5, 0.9}) {
    EXPECT_LE(oracle_nrouge_f1(cases, c), oracle_nrouge_f1(cases, sweep.chosen));
  }
  std::vector<double> cutoffs;
  for (const auto& r : sweep.rows) cutoffs.push_back(r.cutoff);
  EXPECT_EQ(cutoffs, (std::vector<double>{0.0, 0.2, 0.5, 0.9}));
}

TEST(TuneCutoff, AllCorrectKeepsEverything) {
  std::vector<EvalCase> cases{make_case("p", {"a", "b", "c"}, {{"a", 0.9}, {"b", 0.5}, {"c", 0.2}}),
                              make_case("q", {"d"}, {{"d", 0.7}})};
  EXPECT_EQ(tune_cutoff(cases, no_tokens).chosen, 0.0);
}

TEST(TuneCutoff, TieGoesToLargerCutoff) {
  // The second product has no novel reference, so its predictions move
  // precision but never F1.
  std::vector<EvalCase> cases{make_case("p", {"a"}, {{"a", 0.9}}),
                              make_case("q", {}, {{"z", 0.4}})};
  auto sweep = tune_cutoff(cases, no_tokens);
  ASSERT_EQ(sweep.rows.size(), 3u);
  EXPECT_EQ(sweep.rows[0].report.nrouge_f1, sweep.rows[1].report.nrouge_f1);
  EXPECT_EQ(sweep.chosen, 0.4);
}

TEST(TuneCutoff, NoPredictionsIsAnError) {
  std::vector<EvalCase> cases{make_case("p", {"a"}, {})};
  EXPECT_THROW(tune_cutoff(cases, no_tokens), InputError);
  EXPECT_THROW(tune_cutoff({}, no_tokens), InputError);
}

TEST(TuneCutoff, MatchesExhaustiveSweepOnRandomSets) {
  std::mt19937_64 rng(555);
  const Tokens alphabet = {"a", "b", "c", "d", "e", "f", "g"};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<EvalCase> cases;
    std::size_t n = 1 + rng() % 8;
    for (std::size_t i = 0; i < n; ++i) {
      Tokens ref(rng() % 5);
      for (auto& t : ref) t = alphabet[rng() % alphabet.size()];
      std::vector<ScoredToken> preds;
      std::set<std::string> seen;
      std::size_t k = rng() % 6;
      for (std::size_t j = 0; j < k; ++j) {
        std::string t = alphabet[rng() % alphabet.size()];
        if (!seen.insert(t).second) continue;
        // Coarse scores so ties across products are common.
        preds.push_back({t, static_cast<double>(rng() % 11) / 10.0});
      }
      cases.push_back(make_case("p" + std::to_string(i), ref, preds));
    }
    bool any = std::any_of(cases.begin(), cases.end(),
                           [](const EvalCase& c) { return !c.predictions.empty(); });
    if (!any) cases[0].predictions.push_back({"a", 0.5});

    auto sweep = tune_cutoff(cases, no_tokens);

    std::set<double> all{0.0};
    for (const auto& c : cases) {
      for (const auto& p : c.predictions) all.insert(p.score);
    }
    double best = -1.0;
    for (double c : all) {
      best = std::max(best, compute_report(apply_cutoff(cases, c), no_tokens).nrouge_f1);
      ASSERT_NEAR(oracle_nrouge_f1(cases, c),
                  compute_report(apply_cutoff(cases, c), no_tokens).nrouge_f1, 1e-12);
    }
    ASSERT_EQ(sweep.chosen_row().report.nrouge_f1, best);
    ASSERT_EQ(sweep.rows.size(), all.size());
    for (const auto& row : sweep.rows) {
      ASSERT_LE(row.report.nrouge_f1, sweep.chosen_row().report.nrouge_f1);
      if (row.report.nrouge_f1 == best) ASSERT_LE(row.cutoff, sweep.chosen);
    }
    for (std::size_t i = 1; i < sweep.rows.size(); ++i) {
      ASSERT_LT(sweep.rows[i - 1].cutoff, sweep.rows[i].cutoff);
      ASSERT_LE(sweep.rows[i].report.total_tokens, sweep.rows[i - 1].report.total_tokens);
    }
    // Deterministic.
    ASSERT_EQ(tune_cutoff(cases, no_tokens).to_json(), sweep.to_json());
  }
}

TEST(CutoffGrid, ParseAndFixedStep) {
  EXPECT_EQ(CutoffGrid::parse("observed").kind, CutoffGrid::Kind::kObserved);
  auto g = CutoffGrid::parse("step:0.25");
  EXPECT_EQ(g.kind, CutoffGrid::Kind::kFixedStep);
  EXPECT_EQ(candidate_cutoffs({}, g), (std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0}));
  EXPECT_EQ(candidate_cutoffs({}, CutoffGrid::parse("step:0.01")).size(), 101u);
  for (const char* bad : {"step:0", "step:-1", "step:abc", "grid", "step:2"}) {
    EXPECT_THROW(CutoffGrid::parse(bad), ConfigError) << bad;
  }
}

SweepRow row(double cutoff, double novel) {
  SweepRow r;
  r.cutoff = cutoff;
  r.report.novel_tokens = novel;
  r.report.total_tokens = novel;
  return r;
}

TEST(BudgetMatch, Examples) {
  std::vector<SweepRow> rows{row(0.0, 9.0), row(0.29, 3.2), row(0.33, 2.6)};
  auto m = budget_match_cutoff(rows, 3.2);
  EXPECT_EQ(m.cutoff, 0.29);
  EXPECT_FALSE(m.unreachable);

  auto big = budget_match_cutoff(rows, 12.0);
  EXPECT_EQ(big.cutoff, 0.0);
  EXPECT_TRUE(big.unreachable);

  auto last = budget_match_cutoff(rows, 2.6);
  EXPECT_EQ(last.cutoff, 0.33);
  EXPECT_FALSE(last.unreachable);

  EXPECT_EQ(budget_match_cutoff(rows, 9.0).cutoff, 0.0);
  EXPECT_EQ(budget_match_cutoff(rows, 5.0).cutoff, 0.29);
  EXPECT_THROW(budget_match_cutoff(rows, 0.0), ConfigError);
}

TEST(BudgetMatch, FromCasesAgreesWithSweepOracle) {
  std::vector<EvalCase> cases{
      make_case("p", {"a"}, {{"a", 0.9}, {"b", 0.6}, {"c", 0.3}}),
      make_case("q", {"d"}, {{"d", 0.8}, {"e", 0.6}})};
  // Retained means: 0 -> 2.5, 0.3 -> 2, 0.6 -> 1, 0.8 -> 0.5, 0.9 -> 0.
  EXPECT_EQ(budget_match_cutoff(cases, no_tokens, 2.0).cutoff, 0.3);
  EXPECT_EQ(budget_match_cutoff(cases, no_tokens, 1.5).cutoff, 0.6);
  EXPECT_EQ(budget_match_cutoff(cases, no_tokens, 0.5).cutoff, 0.8);
  EXPECT_TRUE(budget_match_cutoff(cases, no_tokens, 3.0).unreachable);
}

TEST(SweepResult, JsonShape) {
  std::vector<EvalCase> cases{make_case("p", {"a"}, {{"a", 0.9}, {"b", 0.5}})};
  auto j = tune_cutoff(cases, no_tokens).to_json();
  EXPECT_EQ(j.at("chosen").get<double>(), 0.5);
  ASSERT_EQ(j.at("rows").size(), 3u);
  EXPECT_TRUE(j.at("rows")[0].contains("cutoff"));
}

}  // namespace
}  // namespace tokexp
