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

#include "tokexp/synthetic.hpp"

#include <algorithm>
#include <array>
#include <random>
#include <set>
#include <string_view>

#include "tokexp/error.hpp"
#include "tokexp/stemmer.hpp"

namespace tokexp {
namespace {

constexpr std::array<std::string_view, 8> kColors = {
    "red", "blue", "green", "black", "white", "pink", "gray", "orange"};
constexpr std::array<std::string_view, 5> kGenders = {"men", "women", "unisex",
                                                      "boys", "girls"};

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::size_t below(std::size_t n) {
    return static_cast<std::size_t>(engine_() % n);
  }
  bool chance(unsigned percent) { return below(100) < percent; }

 private:
  std::mt19937_64 engine_;
};

// Pseudo-words from consonant-vowel syllables, kept only when they are
// their own stem and have not been issued before.
class WordFactory {
 public:
  explicit WordFactory(Rng& rng) : rng_(rng) {
    for (std::string_view w : kColors) used_.insert(std::string(w));
    for (std::string_view w : kGenders) used_.insert(stem(w));
  }

  std::string next() {
    static constexpr std::string_view kOnsets = "bdfgklmnprstvz";
    static constexpr std::string_view kVowels = "aiou";
    while (true) {
      std::string w;
      std::size_t syllables = 2 + rng_.below(2);
      for (std::size_t i = 0; i < syllables; ++i) {
        w.push_back(kOnsets[rng_.below(kOnsets.size())]);
        w.push_back(kVowels[rng_.below(kVowels.size())]);
      }
      if (rng_.chance(50)) w.push_back(kOnsets[rng_.below(kOnsets.size())]);
      if (stem(w) != w || !used_.insert(w).second) continue;
      return w;
    }
  }

  std::vector<std::string> batch(std::size_t n) {
    std::vector<std::string> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(next());
    return out;
  }

 private:
  Rng& rng_;
  std::set<std::string> used_;
};

struct Category {
  std::string noun;
  std::array<std::string, 3> synonyms;
};

template <typename Seq>
const auto& pick(Rng& rng, const Seq& seq) {
  return seq[rng.below(seq.size())];
}

}  // namespace

SyntheticCorpus generate_synthetic(const SyntheticConfig& config) {
  if (config.products == 0 || config.categories == 0 || config.brands == 0 ||
      config.descriptors < 5 || config.intents < 2) {
    throw ConfigError("synthetic corpus sizes are too small");
  }
  if (config.heldout_queries > config.products) {
    throw ConfigError("cannot draw more held-out queries than products");
  }
  Rng rng(config.seed);
  WordFactory words(rng);

  std::vector<Category> categories(config.categories);
  for (auto& c : categories) {
    c.noun = words.next();
    for (auto& s : c.synonyms) s = words.next();
  }
  const std::vector<std::string> brands = words.batch(config.brands);
  const std::vector<std::string> descriptors = words.batch(config.descriptors);
  const std::vector<std::string> intents = words.batch(config.intents);

  SyntheticCorpus corpus;
  struct Latent {
    const Category* category;
    std::string syn_a, syn_b, intent_a, intent_b, d1;
  };
  std::vector<Latent> latent;

  for (std::size_t i = 0; i < config.products; ++i) {
    const Category& cat = pick(rng, categories);
    Product p;
    p.id = "p" + std::to_string(100000 + i);
    std::string d1 = pick(rng, descriptors);
    std::string d2 = pick(rng, descriptors);
    std::string model = "x" + std::to_string(100 + rng.below(900));
    const std::string& brand = pick(rng, brands);
    p.title = brand + " " + d1 + " " + d2 + " " + cat.noun + " " + model;
    p.product_type = cat.noun;
    p.brand = brand;
    p.color = std::string(pick(rng, kColors));
    p.gender = std::string(pick(rng, kGenders));
    p.description = pick(rng, descriptors) + " " + pick(rng, descriptors) + " " +
                    pick(rng, descriptors) + " " + cat.noun;

    std::size_t s1 = rng.below(3);
    std::size_t s2 = (s1 + 1 + rng.below(2)) % 3;
    std::size_t i1 = rng.below(intents.size());
    std::size_t i2 = (i1 + 1 + rng.below(intents.size() - 1)) % intents.size();
    Latent l{&cat, cat.synonyms[s1], cat.synonyms[s2], intents[i1], intents[i2], d1};
    corpus.gold[p.id] = {l.syn_a, l.syn_b, l.intent_a, l.intent_b};

    auto atc = [&] { return static_cast<std::int64_t>(2 + rng.below(9)); };
    auto& eng = corpus.engagement;
    eng.push_back({p.id, l.syn_a + " " + d1, atc()});
    eng.push_back({p.id, l.intent_a + " " + cat.noun, atc()});
    if (rng.chance(60)) eng.push_back({p.id, l.syn_b + " " + l.intent_b, atc()});
    if (rng.chance(30)) {
      eng.push_back({p.id, l.syn_a + " " + cat.noun + " " + l.syn_a, atc()});
    }
    eng.push_back({p.id, brand + " " + cat.noun, atc()});
    if (rng.chance(50)) {
      eng.push_back({p.id,
                     cat.noun + " under $" + std::to_string(10 + rng.below(490)),
                     atc()});
    }
    if (rng.chance(30)) eng.push_back({p.id, l.syn_b + " on sale", atc()});
    if (rng.chance(10)) eng.push_back({p.id, "cheap deals", atc()});
    if (rng.chance(40)) {
      const Category& other = pick(rng, categories);
      eng.push_back({p.id, other.synonyms[rng.below(3)] + " " + pick(rng, intents), 1});
    }

    corpus.baseline_queries.push_back({p.id, l.syn_a + " " + d1 + " " + cat.noun, 0});
    corpus.baseline_queries.push_back({p.id, brand + " " + l.intent_a, 0});

    corpus.products.push_back(std::move(p));
    latent.push_back(std::move(l));
  }

  std::vector<std::size_t> order(config.products);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.below(i)]);
  }
  order.resize(config.heldout_queries);
  std::sort(order.begin(), order.end());
  for (std::size_t i : order) {
    const Latent& l = latent[i];
    const std::string& syn = rng.chance(50) ? l.syn_a : l.syn_b;
    const std::string& intent = rng.chance(50) ? l.intent_a : l.intent_b;
    corpus.heldout.push_back({corpus.products[i].id, syn + " " + intent, 1});
  }
  return corpus;
}

}  // namespace tokexp
