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
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "tokexp/corpus.hpp"
#include "tokexp/error.hpp"
#include "tokexp/retrieval.hpp"

namespace tokexp {
namespace {

using oracle::bm25_term;

Product titled(std::string id, std::string title) {
  return Product{std::move(id), std::move(title), "", "", "", "", ""};
}

// d1: title "red shoe", description "running shoe for trail"
// d2: title "blue shoe"
// d3: title "red hat", brand "Acme"
std::vector<Product> three_docs() {
  return {Product{"d1", "Red Shoe", "", "", "", "", "running shoe for trail"},
          titled("d2", "Blue Shoe"),
          Product{"d3", "Red Hat", "", "Acme", "", "", ""}};
}

TEST(Bm25, HandEvaluatedThreeDocumentCorpus) {
  auto index = InvertedIndex::build(three_docs());
  auto hits = search(index, "red shoes", 10);
  // Title: every length 2, average 2; df(red) = df(shoe) = 2 of N = 3.
  // Description: only d1, length 4, average 4/3; df(shoe) = 1.
  const double title_red = bm25_term(3, 2, 1, 2, 2);
  const double title_shoe = bm25_term(3, 2, 1, 2, 2);
  const double desc_shoe = bm25_term(3, 1, 1, 4, 4.0 / 3.0);
  const double d1 = 2.0 * (title_red + title_shoe) + 1.0 * desc_shoe;
  const double d2 = 2.0 * title_shoe;
  const double d3 = 2.0 * title_red;
  ASSERT_EQ(hits.size(), 3u);
  EXPECT_EQ(hits[0].doc_id, "d1");
  EXPECT_NEAR(hits[0].score, d1, 1e-9);
  // d2 and d3 tie exactly; doc id breaks the tie.
  EXPECT_EQ(hits[1].doc_id, "d2");
  EXPECT_NEAR(hits[1].score, d2, 1e-9);
  EXPECT_EQ(hits[2].doc_id, "d3");
  EXPECT_NEAR(hits[2].score, d3, 1e-9);

  auto acme = search(index, "acme trail", 10);
  ASSERT_EQ(acme.size(), 2u);
  // Attributes: only d3, length 1, average 1/3.
  EXPECT_NEAR(acme[0].score, bm25_term(3, 1, 1, 4, 4.0 / 3.0), 1e-9);
  EXPECT_EQ(acme[0].doc_id, "d1");
  EXPECT_NEAR(acme[1].score, bm25_term(3, 1, 1, 1, 1.0 / 3.0), 1e-9);
}

TEST(Bm25, NumericValuesOfHandFormula) {
  // ln(1 + (3 - 2 + 0.5) / 2.5) * 2.2 / (1 + 1.2) = ln(1.6).
  EXPECT_NEAR(bm25_idf(3, 2), std::log(1.6), 1e-15);
  EXPECT_NEAR(bm25_tf(1, 2, 2, {}), 1.0, 1e-15);
  EXPECT_NEAR(bm25_tf(2, 1, 2, {}), 2 * 2.2 / (2 + 1.2 * (0.25 + 0.375)), 1e-15);
  EXPECT_GE(bm25_idf(10, 10), 0.0);
}

TEST(Search, Examples) {
  auto one = InvertedIndex::build(std::vector<Product>{titled("only", "lamp")});
  auto hits = search(one, "lamp", 10);
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0].doc_id, "only");

  auto index = InvertedIndex::build(three_docs());
  EXPECT_TRUE(search(index, "zeppelin", 10).empty());
  EXPECT_TRUE(search(index, "", 10).empty());
  EXPECT_TRUE(search(index, "!!!", 10).empty());
  EXPECT_EQ(search(index, "shoe", 1).size(), 1u);
  EXPECT_THROW(search(index, "shoe", 0), ConfigError);
}

TEST(Search, RepeatedQueryTokensCountOnce) {
  auto index = InvertedIndex::build(three_docs());
  EXPECT_EQ(search(index, "red", 10), search(index, "red red reds", 10));
}

TEST(Index, ExpansionField) {
  std::vector<Product> products{titled("p", "widget")};
  auto plain = InvertedIndex::build(products);
  EXPECT_TRUE(plain.postings(IndexField::kExpansion, "kid").empty());
  EXPECT_EQ(plain.vocabulary_size(IndexField::kExpansion), 0u);

  Expansions ex{{"p", {"kid"}}};
  auto expanded = InvertedIndex::build(products, ex);
  auto postings = expanded.postings(IndexField::kExpansion, "kid");
  ASSERT_EQ(postings.size(), 1u);
  EXPECT_EQ(expanded.doc_id(postings[0].doc), "p");

  Expansions unknown{{"ghost", {"kid"}}};
  EXPECT_THROW(InvertedIndex::build(products, unknown), InputError);
}

TEST(Index, DeterministicDigestAndRoundTrip) {
  Expansions ex{{"d2", {"sneaker", "kid"}}};
  auto a = InvertedIndex::build(three_docs(), ex);
  auto b = InvertedIndex::build(three_docs(), ex);
  EXPECT_EQ(a.digest(), b.digest());
  EXPECT_NE(a.digest(), InvertedIndex::build(three_docs()).digest());

  std::string path = ::testing::TempDir() + "/index.json";
  a.save(path);
  auto loaded = InvertedIndex::load(path);
  EXPECT_EQ(loaded.digest(), a.digest());
  EXPECT_EQ(search(loaded, "red sneaker kid", 10), search(a, "red sneaker kid", 10));
}

TEST(Index, RejectsForeignDocuments) {
  auto j = InvertedIndex::build(three_docs()).to_json();
  auto wrong_format = j;
  wrong_format["format"] = "something-else";
  EXPECT_THROW(InvertedIndex::from_json(wrong_format), InputError);
  auto wrong_version = j;
  wrong_version["version"] = 99;
  EXPECT_THROW(InvertedIndex::from_json(wrong_version), InputError);
  EXPECT_THROW(InvertedIndex::from_json(nlohmann::json::array()), InputError);
}

TEST(Index, PostingsSortedAndLengthsConsistent) {
  std::mt19937_64 rng(12);
  const std::vector<std::string> words = {"red", "blue", "hat", "shoe", "lamp", "desk", "kid"};
  std::vector<Product> products;
  for (int i = 0; i < 40; ++i) {
    std::string title, desc;
    for (int k = 0; k < 4; ++k) title += words[rng() % words.size()] + " ";
    for (int k = 0; k < 6; ++k) desc += words[rng() % words.size()] + " ";
    products.push_back(Product{"p" + std::to_string(i), title, "", "", "", "", desc});
  }
  auto index = InvertedIndex::build(products);
  for (IndexField f : kAllIndexFields) {
    std::vector<std::uint32_t> lengths(index.document_count(), 0);
    for (const auto& w : words) {
      auto ps = index.postings(f, w);
      for (std::size_t i = 0; i < ps.size(); ++i) {
        if (i > 0) ASSERT_LT(ps[i - 1].doc, ps[i].doc);
        lengths[ps[i].doc] += ps[i].tf;
      }
    }
    for (std::uint32_t d = 0; d < index.document_count(); ++d) {
      ASSERT_EQ(lengths[d], index.doc_length(f, d));
    }
  }
}

TEST(Index, ExpansionOnlyGrowsMatchSets) {
  std::mt19937_64 rng(13);
  const std::vector<std::string> words = {"red", "blue", "hat", "shoe", "lamp",
                                          "desk", "kid", "tot", "zeb", "qua"};
  std::vector<Product> products;
  Expansions ex;
  for (int i = 0; i < 60; ++i) {
    std::string id = "p" + std::to_string(i);
    products.push_back(titled(id, words[rng() % 6] + " " + words[rng() % 6]));
    if (rng() % 2) ex[id] = {words[rng() % words.size()], words[rng() % words.size()]};
  }
  auto plain = InvertedIndex::build(products);
  auto expanded = InvertedIndex::build(products, ex);
  for (int q = 0; q < 50; ++q) {
    std::string query = words[rng() % words.size()] + " " + words[rng() % words.size()];
    auto before = plain.matching_documents(query);
    auto after = expanded.matching_documents(query);
    ASSERT_TRUE(std::includes(after.begin(), after.end(), before.begin(), before.end())) << query;
    for (const auto& h : search(expanded, query, 100)) {
      ASSERT_TRUE(std::isfinite(h.score));
      ASSERT_GE(h.score, 0.0);
    }
  }
}

TEST(EvalRecall, ForcingCase) {
  std::vector<Product> products{titled("p", "widget"), titled("q", "gizmo stand")};
  std::vector<EngagementPair> pairs{{"p", "thingamajig", 1}};
  auto plain = InvertedIndex::build(products);
  auto expanded = InvertedIndex::build(products, Expansions{{"p", {"thingamajig"}}});
  EXPECT_EQ(eval_recall(plain, pairs, 1).recall, 0.0);
  EXPECT_EQ(eval_recall(expanded, pairs, 1).recall, 1.0);
}

TEST(EvalRecall, EmptyPairSet) {
  auto index = InvertedIndex::build(three_docs());
  auto r = eval_recall(index, {}, 10);
  EXPECT_EQ(r.recall, 0.0);
  EXPECT_TRUE(r.empty);
}

TEST(EvalRecall, MixedSetMatchesHandCount) {
  auto index = InvertedIndex::build(three_docs());
  std::vector<EngagementPair> pairs{
      {"d1", "running", 1},  // only d1 matches
      {"d2", "blue", 1},     // only d2
      {"d3", "hat", 1},      // only d3
      {"d3", "acme red", 1}, // d3 first
      {"d1", "red shoe", 1}, // d1 first
      {"d2", "red", 1},      // d1, d3 only
      {"d2", "zeppelin", 1}, // nothing
      {"d3", "shoe", 1},     // d1, d2 only
      {"d1", "trail", 1},    // only d1
      {"d2", "shoe", 1}};    // d1 first, d2 second
  auto at1 = eval_recall(index, pairs, 1);
  EXPECT_EQ(at1.hits, 6u);
  EXPECT_DOUBLE_EQ(at1.recall, 0.6);
  auto at2 = eval_recall(index, pairs, 2);
  EXPECT_EQ(at2.hits, 7u);
  EXPECT_EQ(at2.pairs, 10u);
}

TEST(Ndcg, Examples) {
  using J = Judgment;
  std::vector<J> ideal{J::kExactMatch, J::kExactMatch, J::kSubstitute, J::kIrrelevant};
  EXPECT_NEAR(ndcg_at_10(ideal), 1.0, 1e-12);
  std::vector<J> none{J::kIrrelevant, J::kIrrelevant};
  EXPECT_EQ(ndcg_at_10(none), 0.0);
  EXPECT_EQ(ndcg_at_10(std::vector<J>{}), 0.0);
  std::vector<J> swapped{J::kSubstitute, J::kExactMatch};
  EXPECT_NEAR(ndcg_at_10(swapped), (1 + 2 / std::log2(3)) / (2 + 1 / std::log2(3)), 1e-9);
}

TEST(Ndcg, AgreesWithFormulaOnRandomRankings) {
  std::mt19937_64 rng(14);
  GainScale gains;
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<Judgment> ranked(rng() % 15);
    std::vector<double> g;
    for (auto& j : ranked) {
      j = static_cast<Judgment>(rng() % 3);
      g.push_back(gains.gain(j));
    }
    std::vector<double> ideal = g;
    std::sort(ideal.rbegin(), ideal.rend());
    double expected = oracle::dcg(ideal, 10) > 0 ? oracle::dcg(g, 10) / oracle::dcg(ideal, 10) : 0.0;
    ASSERT_NEAR(ndcg_at_10(ranked), expected, 1e-12);
  }
}

}  // namespace
}  // namespace tokexp
