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

#include "tokexp/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <unordered_set>

#include "tokexp/error.hpp"
#include "tokexp/jsonl.hpp"
#include "tokexp/stemmer.hpp"

namespace tokexp {

std::string_view field_name(ProductField f) {
  switch (f) {
    case ProductField::kTitle: return "title";
    case ProductField::kProductType: return "product_type";
    case ProductField::kBrand: return "brand";
    case ProductField::kColor: return "color";
    case ProductField::kGender: return "gender";
    case ProductField::kDescription: return "description";
  }
  throw InternalError("unknown product field");
}

const std::string& field_value(const Product& p, ProductField f) {
  switch (f) {
    case ProductField::kTitle: return p.title;
    case ProductField::kProductType: return p.product_type;
    case ProductField::kBrand: return p.brand;
    case ProductField::kColor: return p.color;
    case ProductField::kGender: return p.gender;
    case ProductField::kDescription: return p.description;
  }
  throw InternalError("unknown product field");
}

TokenSet::TokenSet(std::span<const std::string> tokens) {
  for (const auto& t : tokens) add(t);
}

void TokenSet::add(const std::string& token, int count) {
  if (token.empty() || count <= 0) return;
  counts_[token] += count;
  total_ += static_cast<std::size_t>(count);
}

bool TokenSet::contains(std::string_view token) const {
  return counts_.find(token) != counts_.end();
}

int TokenSet::count(std::string_view token) const {
  auto it = counts_.find(token);
  return it == counts_.end() ? 0 : it->second;
}

std::vector<std::string> TokenSet::unique() const {
  std::vector<std::string> out;
  out.reserve(counts_.size());
  for (const auto& [token, n] : counts_) out.push_back(token);
  return out;
}

std::vector<std::string> normalize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  };
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (c >= 'A' && c <= 'Z') {
      current.push_back(static_cast<char>(c - 'A' + 'a'));
    } else if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
      current.push_back(static_cast<char>(c));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

std::vector<std::string> analyze(std::string_view text) {
  std::vector<std::string> tokens = normalize(text);
  for (auto& t : tokens) t = stem(t);
  return tokens;
}

TokenSet product_token_set(const Product& product) {
  TokenSet set;
  for (ProductField f : kAllProductFields) {
    for (const auto& t : analyze(field_value(product, f))) set.add(t);
  }
  return set;
}

Catalog::Catalog(std::vector<Product> products) : products_(std::move(products)) {
  token_sets_.reserve(products_.size());
  for (std::size_t i = 0; i < products_.size(); ++i) {
    if (!index_.emplace(products_[i].id, i).second) {
      throw InputError("duplicate product id: " + products_[i].id);
    }
    token_sets_.push_back(product_token_set(products_[i]));
  }
}

const Product* Catalog::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &products_[it->second];
}

const Product& Catalog::at(std::string_view id) const {
  const Product* p = find(id);
  if (p == nullptr) throw InputError("unknown product id: " + std::string(id));
  return *p;
}

const TokenSet& Catalog::tokens(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) {
    throw InputError("unknown product id: " + std::string(id));
  }
  return token_sets_[it->second];
}

std::vector<Product> load_products(std::istream& in,
                                   std::string_view source_name) {
  std::vector<Product> products;
  std::unordered_set<std::string> seen;
  io::for_each_record(in, source_name, [&](const io::Json& r, std::size_t line) {
    Product p;
    p.id = io::require_string(r, "id", source_name, line);
    p.title = io::require_string(r, "title", source_name, line);
    p.product_type = io::optional_string(r, "product_type", source_name, line);
    p.brand = io::optional_string(r, "brand", source_name, line);
    p.color = io::optional_string(r, "color", source_name, line);
    p.gender = io::optional_string(r, "gender", source_name, line);
    p.description = io::optional_string(r, "description", source_name, line);
    std::string where = std::string(source_name) + ":" + std::to_string(line);
    if (p.id.empty()) throw InputError(where + ": empty product id");
    if (p.title.empty()) throw InputError(where + ": empty title");
    if (!seen.insert(p.id).second) {
      throw InputError(where + ": duplicate product id: " + p.id);
    }
    products.push_back(std::move(p));
  });
  return products;
}

std::vector<Product> load_products_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open products file: " + path);
  return load_products(in, path);
}

void write_products(std::ostream& out, std::span<const Product> products) {
  for (const auto& p : products) {
    io::Json r;
    r["id"] = p.id;
    for (ProductField f : kAllProductFields) {
      r[std::string(field_name(f))] = field_value(p, f);
    }
    io::write_line(out, r);
  }
}

namespace {

bool blank(std::string_view s) {
  return s.find_first_not_of(" \t\r\n\f\v") == std::string_view::npos;
}

}  // namespace

EngagementLoad load_engagement(std::istream& in, std::int64_t min_atc,
                               const Catalog* catalog,
                               UnknownProductPolicy policy,
                               std::string_view source_name) {
  if (min_atc < 0) throw ConfigError("min_atc must be >= 0");
  EngagementLoad result;
  io::for_each_record(in, source_name, [&](const io::Json& r, std::size_t line) {
    EngagementPair pair;
    pair.product_id = io::require_string(r, "product_id", source_name, line);
    pair.query = io::require_string(r, "query", source_name, line);
    pair.atc_count = io::require_integer(r, "atc_count", source_name, line);
    std::string where = std::string(source_name) + ":" + std::to_string(line);
    if (pair.atc_count < 0) throw InputError(where + ": negative atc_count");
    if (blank(pair.query)) throw InputError(where + ": empty query");
    if (catalog != nullptr && !catalog->contains(pair.product_id)) {
      if (policy == UnknownProductPolicy::kError) {
        throw InputError(where + ": unknown product id: " + pair.product_id);
      }
      result.warnings.push_back(where + ": skipping unknown product id: " +
                                pair.product_id);
      ++result.skipped_unknown_product;
      return;
    }
    if (pair.atc_count < min_atc) {
      ++result.dropped_below_min_atc;
      return;
    }
    result.pairs.push_back(std::move(pair));
  });
  return result;
}

EngagementLoad load_engagement_file(const std::string& path,
                                    std::int64_t min_atc,
                                    const Catalog* catalog,
                                    UnknownProductPolicy policy) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open engagement file: " + path);
  return load_engagement(in, min_atc, catalog, policy, path);
}

void write_engagement(std::ostream& out,
                      std::span<const EngagementPair> pairs) {
  for (const auto& p : pairs) {
    io::Json r;
    r["product_id"] = p.product_id;
    r["query"] = p.query;
    r["atc_count"] = p.atc_count;
    io::write_line(out, r);
  }
}

std::string_view split_name(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kValidation: return "validation";
    case Split::kTest: return "test";
  }
  throw InternalError("unknown split");
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "validation") return Split::kValidation;
  if (name == "test") return Split::kTest;
  throw ConfigError("unknown split name: " + std::string(name));
}

const std::vector<std::string>& CatalogSplit::ids(Split s) const {
  switch (s) {
    case Split::kTrain: return train;
    case Split::kValidation: return validation;
    case Split::kTest: return test;
  }
  throw InternalError("unknown split");
}

bool CatalogSplit::contains(Split s, std::string_view id) const {
  const auto& v = ids(s);
  return std::binary_search(v.begin(), v.end(), id);
}

Split CatalogSplit::split_of(std::string_view id) const {
  for (Split s : {Split::kTrain, Split::kValidation, Split::kTest}) {
    if (contains(s, id)) return s;
  }
  throw InputError("product id not in any split: " + std::string(id));
}

CatalogSplit split_by_product(std::span<const std::string> product_ids,
                              const SplitRatios& ratios, std::uint64_t seed) {
  if (!(ratios.train > 0 && ratios.validation > 0 && ratios.test > 0)) {
    throw ConfigError("split ratios must be positive");
  }
  if (product_ids.empty()) throw InputError("no product ids to split");

  std::vector<std::string> ids(product_ids.begin(), product_ids.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

  // Fisher-Yates driven by raw engine output; std::shuffle's use of the
  // engine is implementation-defined.
  std::mt19937_64 rng(seed);
  for (std::size_t i = ids.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(ids[i - 1], ids[j]);
  }

  const std::array<double, 3> shares = {ratios.train, ratios.validation,
                                        ratios.test};
  const double total = shares[0] + shares[1] + shares[2];
  const auto n = static_cast<double>(ids.size());
  std::array<std::size_t, 3> sizes{};
  std::array<double, 3> remainders{};
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    double exact = n * shares[k] / total;
    sizes[k] = static_cast<std::size_t>(std::floor(exact));
    remainders[k] = exact - static_cast<double>(sizes[k]);
    assigned += sizes[k];
  }
  std::array<std::size_t, 3> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return remainders[a] > remainders[b];
  });
  for (std::size_t k = 0; assigned < ids.size(); ++k, ++assigned) {
    ++sizes[order[k % 3]];
  }

  CatalogSplit split;
  auto first = ids.begin();
  split.train.assign(first, first + static_cast<std::ptrdiff_t>(sizes[0]));
  first += static_cast<std::ptrdiff_t>(sizes[0]);
  split.validation.assign(first, first + static_cast<std::ptrdiff_t>(sizes[1]));
  first += static_cast<std::ptrdiff_t>(sizes[1]);
  split.test.assign(first, ids.end());
  for (auto* v : {&split.train, &split.validation, &split.test}) {
    std::sort(v->begin(), v->end());
  }
  return split;
}

void write_split(std::ostream& out, const CatalogSplit& split) {
  for (Split s : {Split::kTrain, Split::kValidation, Split::kTest}) {
    for (const auto& id : split.ids(s)) {
      io::Json r;
      r["product_id"] = id;
      r["split"] = std::string(split_name(s));
      io::write_line(out, r);
    }
  }
}

CatalogSplit load_split_file(const std::string& path) {
  CatalogSplit split;
  std::set<std::string> seen;
  io::for_each_record_in_file(path, [&](const io::Json& r, std::size_t line) {
    std::string id = io::require_string(r, "product_id", path, line);
    std::string name = io::require_string(r, "split", path, line);
    if (!seen.insert(id).second) {
      throw InputError(path + ":" + std::to_string(line) +
                       ": product listed in two splits: " + id);
    }
    Split s;
    try {
      s = parse_split(name);
    } catch (const ConfigError& e) {
      throw InputError(path + ":" + std::to_string(line) + ": " + e.what());
    }
    switch (s) {
      case Split::kTrain: split.train.push_back(id); break;
      case Split::kValidation: split.validation.push_back(id); break;
      case Split::kTest: split.test.push_back(id); break;
    }
  });
  for (auto* v : {&split.train, &split.validation, &split.test}) {
    std::sort(v->begin(), v->end());
  }
  return split;
}

}  // namespace tokexp
