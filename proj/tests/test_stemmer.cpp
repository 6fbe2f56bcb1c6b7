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

#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "tokexp/stemmer.hpp"

namespace tokexp {
namespace {

// Reference stems produced by an independent Porter implementation run in
// its original-algorithm mode; one pass per word.
std::vector<std::pair<std::string, std::string>> reference_vocabulary() {
  std::ifstream in(std::string(TOKEXP_TEST_DATA) + "/porter_vocab.txt");
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string word, stemmed;
    fields >> word >> stemmed;
    out.emplace_back(word, stemmed);
  }
  return out;
}

TEST(Stemmer, MatchesReferenceImplementation) {
  auto vocab = reference_vocabulary();
  ASSERT_GT(vocab.size(), 3000u);
  std::size_t mismatches = 0;
  for (const auto& [word, expected] : vocab) {
    if (porter_stem_once(word) != expected) {
      ++mismatches;
      ADD_FAILURE() << word << ": got " << porter_stem_once(word) << ", want "
                    << expected;
      if (mismatches > 20) break;
    }
  }
  EXPECT_EQ(mismatches, 0u);
}

TEST(Stemmer, IdempotentOverVocabulary) {
  for (const auto& [word, unused] : reference_vocabulary()) {
    const std::string once = stem(word);
    ASSERT_EQ(stem(once), once) << word;
  }
}

TEST(Stemmer, FixedPointAgreesWithSinglePassWhenStable) {
  for (const auto& [word, single] : reference_vocabulary()) {
    if (porter_stem_once(single) == single) {
      ASSERT_EQ(stem(word), single) << word;
    }
  }
}

TEST(Stemmer, Examples) {
  EXPECT_EQ(stem("kids"), "kid");
  EXPECT_EQ(stem("kid"), "kid");
  EXPECT_EQ(stem("floaties"), "floati");
  EXPECT_EQ(porter_stem_once("agreed"), "agre");
  EXPECT_EQ(stem("agreed"), "agr");
}

TEST(Stemmer, ForeignWordWithoutApplicableRuleIsUnchanged) {
  EXPECT_EQ(stem("salvavida"), "salvavida");
}

TEST(Stemmer, ShortAndNumericTokensUnchanged) {
  EXPECT_EQ(stem(""), "");
  EXPECT_EQ(stem("a"), "a");
  EXPECT_EQ(stem("is"), "is");
  EXPECT_EQ(stem("500"), "500");
  EXPECT_EQ(stem("3in1"), "3in1");
}

}  // namespace
}  // namespace tokexp
