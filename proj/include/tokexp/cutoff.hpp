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

// Confidence-cutoff selection by sweeping candidate cutoffs and keeping the
// one with the best nROUGE F1.

#pragma once

#include <span>
#include <vector>

#include "json.hpp"
#include "tokexp/metrics.hpp"

namespace tokexp {

struct CutoffGrid {
  enum class Kind { kObserved, kFixedStep };
  Kind kind = Kind::kObserved;
  // Used by kFixedStep: candidates 0, step, 2*step, ... up to 1.
  double step = 0.01;

  static CutoffGrid parse(std::string_view spec);  // "observed" | "step:X"
};

// {0} plus every distinct observed score, or the fixed grid. Ascending.
std::vector<double> candidate_cutoffs(std::span<const EvalCase> cases,
                                      const CutoffGrid& grid = {});

struct SweepRow {
  double cutoff = 0.0;
  MetricsReport report;
};

struct CutoffSweepResult {
  std::vector<SweepRow> rows;  // ascending cutoff
  double chosen = 0.0;

  const SweepRow& chosen_row() const;
  nlohmann::json to_json() const;
};

// Ties in nROUGE F1 go to the larger cutoff. Throws InputError when no case
// carries a prediction.
CutoffSweepResult tune_cutoff(std::span<const EvalCase> cases,
                              const TokenLookup& product_tokens,
                              const CutoffGrid& grid = {});

struct BudgetMatch {
  double cutoff = 0.0;
  // Even cutoff 0 keeps fewer novel tokens than the target.
  bool unreachable = false;
};

// Smallest cutoff whose mean retained novel-token count is <= target.
BudgetMatch budget_match_cutoff(std::span<const SweepRow> rows,
                                double target_mean_novel);
BudgetMatch budget_match_cutoff(std::span<const EvalCase> cases,
                                const TokenLookup& product_tokens,
                                double target_mean_novel,
                                const CutoffGrid& grid = {});

}  // namespace tokexp
