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

#include "tokexp/targets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include "tokexp/error.hpp"
#include "tokexp/jsonl.hpp"

namespace tokexp {

double loss_weight(int frequency, double alpha) {
  if (frequency < 1) throw ConfigError("frequency must be >= 1");
  if (!(alpha >= 0.0)) throw ConfigError("alpha must be >= 0");
  return std::pow(static_cast<double>(frequency), alpha);
}

std::vector<TargetToken> build_target_tokens(
    const Product& product, std::span<const NovelPair> novel_pairs,
    const TargetConfig& config) {
  const TokenSet product_tokens = product_token_set(product);
  std::map<std::string, int> freq;
  for (const auto& pair : novel_pairs) {
    if (pair.product_id != product.id) {
      throw InternalError("novel pair for " + pair.product_id +
                          " passed to targets of " + product.id);
    }
    for (std::size_t i = 0; i < pair.novel_tokens.size(); ++i) {
      const std::string& t = pair.novel_tokens[i];
      if (product_tokens.contains(t)) continue;
      int n = i < pair.occurrences.size() ? pair.occurrences[i] : 1;
      freq[t] += n;
    }
  }
  std::vector<TargetToken> targets;
  targets.reserve(freq.size());
  for (const auto& [token, f] : freq) {
    targets.push_back({token, f, loss_weight(f, config.alpha)});
  }
  std::stable_sort(targets.begin(), targets.end(),
                   [](const TargetToken& a, const TargetToken& b) {
                     return a.frequency > b.frequency;
                   });
  return targets;
}

std::string serialize_product(const Product& product,
                              const SerializationConfig& config) {
  std::string out;
  for (ProductField f : config.fields) {
    const std::string& value = field_value(product, f);
    if (value.empty()) continue;
    if (!out.empty()) out.push_back(' ');
    out += field_name(f);
    out += ": ";
    out += value;
  }
  return out;
}

std::vector<TrainingInstance> emit_training_instances(
    const Product& product, std::span<const TargetToken> targets,
    const SerializationConfig& config) {
  std::vector<TrainingInstance> out;
  if (targets.empty()) return out;
  const std::string input = serialize_product(product, config);
  out.reserve(targets.size());
  for (const auto& t : targets) out.push_back({product.id, input, t});
  return out;
}

std::vector<TrainingInstance> build_training_set(
    const Catalog& catalog, std::span<const NovelPair> novel_pairs,
    std::span<const std::string> product_ids, const TargetConfig& config,
    const SerializationConfig& serialization) {
  std::map<std::string, std::vector<NovelPair>> by_product;
  for (const auto& p : novel_pairs) by_product[p.product_id].push_back(p);

  std::vector<std::string> ids(product_ids.begin(), product_ids.end());
  if (ids.empty()) {
    for (const auto& p : catalog.products()) ids.push_back(p.id);
  }
  std::vector<TrainingInstance> out;
  for (const auto& id : ids) {
    auto it = by_product.find(id);
    if (it == by_product.end()) continue;
    const Product& product = catalog.at(id);
    auto targets = build_target_tokens(product, it->second, config);
    auto instances = emit_training_instances(product, targets, serialization);
    out.insert(out.end(), std::make_move_iterator(instances.begin()),
               std::make_move_iterator(instances.end()));
  }
  return out;
}

void write_training_instances(std::ostream& out,
                              std::span<const TrainingInstance> instances) {
  for (const auto& inst : instances) {
    io::Json r;
    r["product_id"] = inst.product_id;
    r["input_text"] = inst.input_text;
    r["target_token"] = inst.target.token;
    r["frequency"] = inst.target.frequency;
    r["weight"] = inst.target.weight;
    io::write_line(out, r);
  }
}

std::vector<TrainingInstance> load_training_instances(std::istream& in,
                                                      std::string_view source) {
  std::vector<TrainingInstance> out;
  io::for_each_record(in, source, [&](const io::Json& r, std::size_t line) {
    TrainingInstance inst;
    inst.product_id = io::require_string(r, "product_id", source, line);
    inst.input_text = io::require_string(r, "input_text", source, line);
    inst.target.token = io::require_string(r, "target_token", source, line);
    long long f = io::require_integer(r, "frequency", source, line);
    if (f < 1) {
      throw InputError(std::string(source) + ":" + std::to_string(line) +
                       ": frequency must be >= 1");
    }
    inst.target.frequency = static_cast<int>(f);
    inst.target.weight = io::require_number(r, "weight", source, line);
    out.push_back(std::move(inst));
  });
  return out;
}

std::vector<TrainingInstance> load_training_instances_file(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open training file: " + path);
  return load_training_instances(in, path);
}

}  // namespace tokexp
