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

// Catalog ingestion, text analysis and product splits.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tokexp {

struct Product {
  std::string id;
  std::string title;
  std::string product_type;
  std::string brand;
  std::string color;
  std::string gender;
  std::string description;
};

// Text fields in their canonical order, paired with their record keys.
enum class ProductField {
  kTitle,
  kProductType,
  kBrand,
  kColor,
  kGender,
  kDescription,
};

inline constexpr std::array<ProductField, 6> kAllProductFields = {
    ProductField::kTitle, ProductField::kProductType, ProductField::kBrand,
    ProductField::kColor, ProductField::kGender,      ProductField::kDescription,
};

std::string_view field_name(ProductField f);
const std::string& field_value(const Product& p, ProductField f);

struct EngagementPair {
  std::string product_id;
  std::string query;
  std::int64_t atc_count = 0;

  friend bool operator==(const EngagementPair&,
                         const EngagementPair&) = default;
};

// Multiset of analyzed tokens. Iteration order is lexicographic.
class TokenSet {
 public:
  TokenSet() = default;
  explicit TokenSet(std::span<const std::string> tokens);

  void add(const std::string& token, int count = 1);

  bool contains(std::string_view token) const;
  int count(std::string_view token) const;
  // Total number of tokens with multiplicity.
  std::size_t size() const { return total_; }
  std::size_t unique_size() const { return counts_.size(); }
  bool empty() const { return total_ == 0; }

  const std::map<std::string, int, std::less<>>& counts() const {
    return counts_;
  }
  std::vector<std::string> unique() const;

  friend bool operator==(const TokenSet&, const TokenSet&) = default;

 private:
  std::map<std::string, int, std::less<>> counts_;
  std::size_t total_ = 0;
};

// Lowercases ASCII letters and splits on every byte that is not an ASCII
// letter or digit. Empty fragments are dropped; order is preserved.
std::vector<std::string> normalize(std::string_view text);

// normalize followed by stem on every token. This is the single analyzer
// shared by products, queries, predictions and the index.
std::vector<std::string> analyze(std::string_view text);

// All six text fields, analyzed.
TokenSet product_token_set(const Product& product);

// Products keyed by id, preserving load order.
class Catalog {
 public:
  Catalog() = default;
  explicit Catalog(std::vector<Product> products);

  const std::vector<Product>& products() const { return products_; }
  const Product* find(std::string_view id) const;
  const Product& at(std::string_view id) const;
  bool contains(std::string_view id) const { return find(id) != nullptr; }
  std::size_t size() const { return products_.size(); }

  // Cached product_token_set for the given id.
  const TokenSet& tokens(std::string_view id) const;

 private:
  std::vector<Product> products_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<TokenSet> token_sets_;
};

std::vector<Product> load_products(std::istream& in,
                                   std::string_view source_name = "<products>");
std::vector<Product> load_products_file(const std::string& path);
void write_products(std::ostream& out, std::span<const Product> products);

enum class UnknownProductPolicy { kSkipWithWarning, kError };

struct EngagementLoad {
  std::vector<EngagementPair> pairs;
  std::size_t dropped_below_min_atc = 0;
  std::size_t skipped_unknown_product = 0;
  std::vector<std::string> warnings;
};

inline constexpr std::int64_t kDefaultMinAtc = 2;

// Drops pairs with atc_count < min_atc. `catalog` may be null, in which case
// product references are not checked.
EngagementLoad load_engagement(
    std::istream& in, std::int64_t min_atc, const Catalog* catalog,
    UnknownProductPolicy policy = UnknownProductPolicy::kSkipWithWarning,
    std::string_view source_name = "<engagement>");
EngagementLoad load_engagement_file(
    const std::string& path, std::int64_t min_atc, const Catalog* catalog,
    UnknownProductPolicy policy = UnknownProductPolicy::kSkipWithWarning);
void write_engagement(std::ostream& out, std::span<const EngagementPair> pairs);

enum class Split { kTrain, kValidation, kTest };
std::string_view split_name(Split s);
Split parse_split(std::string_view name);

struct CatalogSplit {
  // Each list is sorted.
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;

  const std::vector<std::string>& ids(Split s) const;
  // Which set holds `id`; throws InputError if none does.
  Split split_of(std::string_view id) const;
  bool contains(Split s, std::string_view id) const;

  friend bool operator==(const CatalogSplit&, const CatalogSplit&) = default;
};

struct SplitRatios {
  double train = 8.0;
  double validation = 1.0;
  double test = 1.0;
};

// Seeded shuffle of the sorted unique ids, then largest-remainder sizing so
// every set is within one of its exact share.
CatalogSplit split_by_product(std::span<const std::string> product_ids,
                              const SplitRatios& ratios, std::uint64_t seed);

// Split files are JSON-lines records {"product_id": ..., "split": ...}.
void write_split(std::ostream& out, const CatalogSplit& split);
CatalogSplit load_split_file(const std::string& path);

}  // namespace tokexp
