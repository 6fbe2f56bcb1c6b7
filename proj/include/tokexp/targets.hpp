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

// Per-product novel-token targets, frequency loss weights, and the
// one-instance-per-token training export.

#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "tokexp/corpus.hpp"
#include "tokexp/filters.hpp"

namespace tokexp {

struct TargetConfig {
  // Exponent applied to token frequency in the loss weight.
  double alpha = 0.5;
};

struct TargetToken {
  std::string token;
  int frequency = 0;
  double weight = 1.0;

  friend bool operator==(const TargetToken&, const TargetToken&) = default;
};

// frequency^alpha.
double loss_weight(int frequency, double alpha);

// Aggregates the product's novel pairs into one target per unique token.
// Frequency counts every occurrence across the product's queries, repeats
// inside a query included. Tokens present in the product are excluded here
// again, independent of the filters. Sorted by frequency descending, then
// token.
std::vector<TargetToken> build_target_tokens(
    const Product& product, std::span<const NovelPair> novel_pairs,
    const TargetConfig& config = {});

struct SerializationConfig {
  std::vector<ProductField> fields{kAllProductFields.begin(),
                                   kAllProductFields.end()};
};

// "title: ... brand: ... color: ..." in the configured order; empty fields
// are left out.
std::string serialize_product(const Product& product,
                              const SerializationConfig& config = {});

struct TrainingInstance {
  std::string product_id;
  std::string input_text;
  TargetToken target;

  friend bool operator==(const TrainingInstance&,
                         const TrainingInstance&) = default;
};

std::vector<TrainingInstance> emit_training_instances(
    const Product& product, std::span<const TargetToken> targets,
    const SerializationConfig& config = {});

// Groups `novel_pairs` by product and emits instances for every product in
// `product_ids` (catalog order when empty).
std::vector<TrainingInstance> build_training_set(
    const Catalog& catalog, std::span<const NovelPair> novel_pairs,
    std::span<const std::string> product_ids, const TargetConfig& config = {},
    const SerializationConfig& serialization = {});

// {product_id, input_text, target_token, frequency, weight} per line.
void write_training_instances(std::ostream& out,
                              std::span<const TrainingInstance> instances);
std::vector<TrainingInstance> load_training_instances(std::istream& in,
                                                      std::string_view source);
std::vector<TrainingInstance> load_training_instances_file(
    const std::string& path);

}  // namespace tokexp
