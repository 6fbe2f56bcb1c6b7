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

#include "tokexp/stemmer.hpp"

#include <array>
#include <cstddef>
#include <utility>

namespace tokexp {
namespace {

struct Rule {
  std::string_view suffix;
  std::string_view replacement;
};

class Word {
 public:
  explicit Word(std::string_view w) : s_(w) {}

  const std::string& str() const { return s_; }
  std::string take() && { return std::move(s_); }

  bool ends_with(std::string_view suffix) const {
    return s_.size() >= suffix.size() &&
           std::string_view(s_).substr(s_.size() - suffix.size()) == suffix;
  }

  // y counts as a consonant at the start or after a vowel.
  bool is_consonant(std::size_t i) const {
    switch (s_[i]) {
      case 'a': case 'e': case 'i': case 'o': case 'u':
        return false;
      case 'y':
        return i == 0 || !is_consonant(i - 1);
      default:
        return true;
    }
  }

  // Number of VC sequences in s_[0, len).
  int measure(std::size_t len) const {
    int m = 0;
    std::size_t i = 0;
    while (i < len && is_consonant(i)) ++i;
    while (i < len) {
      while (i < len && !is_consonant(i)) ++i;
      if (i >= len) break;
      while (i < len && is_consonant(i)) ++i;
      ++m;
    }
    return m;
  }

  bool has_vowel(std::size_t len) const {
    for (std::size_t i = 0; i < len; ++i) {
      if (!is_consonant(i)) return true;
    }
    return false;
  }

  bool double_consonant(std::size_t len) const {
    return len >= 2 && s_[len - 1] == s_[len - 2] && is_consonant(len - 1);
  }

  // *o: stem ends consonant-vowel-consonant, last not w, x or y.
  bool cvc(std::size_t len) const {
    if (len < 3) return false;
    if (!is_consonant(len - 1) || is_consonant(len - 2) ||
        !is_consonant(len - 3)) {
      return false;
    }
    char c = s_[len - 1];
    return c != 'w' && c != 'x' && c != 'y';
  }

  void replace_suffix(std::size_t suffix_len, std::string_view with) {
    s_.resize(s_.size() - suffix_len);
    s_.append(with);
  }

  std::size_t size() const { return s_.size(); }
  char back() const { return s_.back(); }

 private:
  std::string s_;
};

// First listed suffix that matches decides; a failed condition ends the step.
template <std::size_t N, typename Cond>
void apply_rules(Word& w, const std::array<Rule, N>& rules, Cond cond) {
  for (const Rule& r : rules) {
    if (!w.ends_with(r.suffix)) continue;
    std::size_t stem_len = w.size() - r.suffix.size();
    if (cond(r, stem_len)) w.replace_suffix(r.suffix.size(), r.replacement);
    return;
  }
}

void step1a(Word& w) {
  if (w.ends_with("sses")) {
    w.replace_suffix(4, "ss");
  } else if (w.ends_with("ies")) {
    w.replace_suffix(3, "i");
  } else if (w.ends_with("ss")) {
    // unchanged
  } else if (w.ends_with("s")) {
    w.replace_suffix(1, "");
  }
}

void step1b(Word& w) {
  if (w.ends_with("eed")) {
    if (w.measure(w.size() - 3) > 0) w.replace_suffix(3, "ee");
    return;
  }
  bool stripped = false;
  if (w.ends_with("ed") && w.has_vowel(w.size() - 2)) {
    w.replace_suffix(2, "");
    stripped = true;
  } else if (w.ends_with("ing") && w.has_vowel(w.size() - 3)) {
    w.replace_suffix(3, "");
    stripped = true;
  }
  if (!stripped) return;

  if (w.ends_with("at") || w.ends_with("bl") || w.ends_with("iz")) {
    w.replace_suffix(0, "e");
  } else if (w.double_consonant(w.size())) {
    char c = w.back();
    if (c != 'l' && c != 's' && c != 'z') w.replace_suffix(1, "");
  } else if (w.measure(w.size()) == 1 && w.cvc(w.size())) {
    w.replace_suffix(0, "e");
  }
}

void step1c(Word& w) {
  if (w.ends_with("y") && w.has_vowel(w.size() - 1)) w.replace_suffix(1, "i");
}

constexpr std::array<Rule, 20> kStep2 = {{
    {"ational", "ate"}, {"tional", "tion"}, {"enci", "ence"},
    {"anci", "ance"},   {"izer", "ize"},    {"abli", "able"},
    {"alli", "al"},     {"entli", "ent"},   {"eli", "e"},
    {"ousli", "ous"},   {"ization", "ize"}, {"ation", "ate"},
    {"ator", "ate"},    {"alism", "al"},    {"iveness", "ive"},
    {"fulness", "ful"}, {"ousness", "ous"}, {"aliti", "al"},
    {"iviti", "ive"},   {"biliti", "ble"},
}};

constexpr std::array<Rule, 7> kStep3 = {{
    {"icate", "ic"}, {"ative", ""}, {"alize", "al"}, {"iciti", "ic"},
    {"ical", "ic"},  {"ful", ""},   {"ness", ""},
}};

constexpr std::array<Rule, 19> kStep4 = {{
    {"al", ""},  {"ance", ""}, {"ence", ""}, {"er", ""},    {"ic", ""},
    {"able", ""}, {"ible", ""}, {"ant", ""},  {"ement", ""}, {"ment", ""},
    {"ent", ""},  {"ion", ""},  {"ou", ""},   {"ism", ""},   {"ate", ""},
    {"iti", ""},  {"ous", ""},  {"ive", ""},  {"ize", ""},
}};

void step2(Word& w) {
  apply_rules(w, kStep2, [&](const Rule&, std::size_t len) {
    return w.measure(len) > 0;
  });
}

void step3(Word& w) {
  apply_rules(w, kStep3, [&](const Rule&, std::size_t len) {
    return w.measure(len) > 0;
  });
}

void step4(Word& w) {
  apply_rules(w, kStep4, [&](const Rule& r, std::size_t len) {
    if (w.measure(len) <= 1) return false;
    if (r.suffix == "ion") {
      char c = w.str()[len - 1];
      return c == 's' || c == 't';
    }
    return true;
  });
}

void step5(Word& w) {
  if (w.ends_with("e")) {
    std::size_t len = w.size() - 1;
    int m = w.measure(len);
    if (m > 1 || (m == 1 && !w.cvc(len))) w.replace_suffix(1, "");
  }
  if (w.measure(w.size()) > 1 && w.double_consonant(w.size()) &&
      w.back() == 'l') {
    w.replace_suffix(1, "");
  }
}

}  // namespace

std::string porter_stem_once(std::string_view word) {
  if (word.size() <= 2) return std::string(word);
  Word w(word);
  step1a(w);
  step1b(w);
  step1c(w);
  step2(w);
  step3(w);
  step4(w);
  step5(w);
  return std::move(w).take();
}

std::string stem(std::string_view token) {
  std::string current(token);
  // Each non-trivial pass shortens the word or rewrites a final y, so this
  // converges within a handful of iterations.
  for (int i = 0; i < 16; ++i) {
    std::string next = porter_stem_once(current);
    if (next == current) break;
    current = std::move(next);
  }
  return current;
}

}  // namespace tokexp
