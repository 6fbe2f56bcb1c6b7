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

#include "tokexp/cutoff.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tokexp/error.hpp"

namespace tokexp {

CutoffGrid CutoffGrid::parse(std::string_view spec) {
  CutoffGrid g;
  if (spec == "observed") return g;
  constexpr std::string_view kPrefix = "step:";
  if (spec.substr(0, kPrefix.size()) == kPrefix) {
    std::string value(spec.substr(kPrefix.size()));
    double step = 0.0;
    try {
      std::size_t used = 0;
      step = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
      throw ConfigError("invalid cutoff grid step: " + value);
    }
    if (!(step > 0.0 && step <= 1.0)) {
      throw ConfigError("cutoff grid step must be in (0, 1]");
    }
    g.kind = Kind::kFixedStep;
    g.step = step;
    return g;
  }
  throw ConfigError("unknown cutoff grid: " + std::string(spec));
}

std::vector<double> candidate_cutoffs(std::span<const EvalCase> cases,
                                      const CutoffGrid& grid) {
  std::vector<double> out{0.0};
  if (grid.kind == CutoffGrid::Kind::kFixedStep) {
    const auto steps = static_cast<long>(std::floor(1.0 / grid.step + 1e-9));
    for (long k = 1; k <= steps; ++k) out.push_back(static_cast<double>(k) * grid.step);
    return out;
  }
  for (const auto& c : cases) {
    for (const auto& p : c.predictions) out.push_back(p.score);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

const SweepRow& CutoffSweepResult::chosen_row() const {
  for (const auto& r : rows) {
    if (r.cutoff == chosen) return r;
  }
  throw InternalError("chosen cutoff missing from sweep rows");
}

nlohmann::json CutoffSweepResult::to_json() const {
  nlohmann::json j;
  j["chosen"] = chosen;
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json row = r.report.to_json();
    row["cutoff"] = r.cutoff;
    arr.push_back(std::move(row));
  }
  j["rows"] = std::move(arr);
  return j;
}

CutoffSweepResult tune_cutoff(std::span<const EvalCase> cases,
                              const TokenLookup& product_tokens,
                              const CutoffGrid& grid) {
  bool any = std::any_of(cases.begin(), cases.end(), [](const EvalCase& c) {
    return !c.predictions.empty();
  });
  if (!any) throw InputError("cutoff tuning needs at least one prediction");

  CutoffSweepResult result;
  double best = -1.0;
  for (double cutoff : candidate_cutoffs(cases, grid)) {
    std::vector<EvalRecord> records = apply_cutoff(cases, cutoff);
    MetricsReport report = compute_report(records, product_tokens);
    if (report.nrouge_f1 >= best) {
      best = report.nrouge_f1;
      result.chosen = cutoff;
    }
    result.rows.push_back({cutoff, std::move(report)});
  }
  return result;
}

BudgetMatch budget_match_cutoff(std::span<const SweepRow> rows,
                                double target_mean_novel) {
  if (!(target_mean_novel > 0.0)) {
    throw ConfigError("novel-token budget must be positive");
  }
  if (rows.empty()) throw InputError("empty cutoff sweep");
  BudgetMatch m;
  if (rows.front().report.novel_tokens < target_mean_novel) {
    m.unreachable = true;
    m.cutoff = 0.0;
    return m;
  }
  for (const auto& r : rows) {
    if (r.report.novel_tokens <= target_mean_novel) {
      m.cutoff = r.cutoff;
      return m;
    }
  }
  m.cutoff = rows.back().cutoff;
  m.unreachable = true;
  return m;
}

BudgetMatch budget_match_cutoff(std::span<const EvalCase> cases,
                                const TokenLookup& product_tokens,
                                double target_mean_novel,
                                const CutoffGrid& grid) {
  std::vector<SweepRow> rows;
  for (double cutoff : candidate_cutoffs(cases, grid)) {
    std::vector<EvalRecord> records = apply_cutoff(cases, cutoff);
    rows.push_back({cutoff, compute_report(records, product_tokens)});
  }
  return budget_match_cutoff(rows, target_mean_novel);
}

}  // namespace tokexp
