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

// Seeded synthetic catalog with a built-in vocabulary gap: every product
// has gold tokens that customers search with but that never occur in any
// product text.

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "tokexp/corpus.hpp"
#include "tokexp/retrieval.hpp"

namespace tokexp {

struct SyntheticConfig {
  std::uint64_t seed = 0;
  std::size_t products = 1000;
  std::size_t heldout_queries = 200;
  std::size_t categories = 25;
  std::size_t brands = 40;
  std::size_t descriptors = 200;
  std::size_t intents = 120;
};

struct SyntheticCorpus {
  std::vector<Product> products;
  // Includes full-match, price-phrase and low-ATC noise pairs.
  std::vector<EngagementPair> engagement;
  // Gold novel tokens per product (analyzed form).
  Expansions gold;
  // Queries made only of the product's gold tokens, one per sampled
  // product; none of their tokens occurs in any product text.
  std::vector<EngagementPair> heldout;
  // Raw engagement queries per product, for a query-style baseline.
  std::vector<EngagementPair> baseline_queries;
};

SyntheticCorpus generate_synthetic(const SyntheticConfig& config);

}  // namespace tokexp
