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

// English suffix stripping after M.F. Porter's 1980 algorithm.

#pragma once

#include <string>
#include <string_view>

namespace tokexp {

// One pass of the original five-step algorithm over a lowercase token.
// Tokens of length <= 2 are returned unchanged.
std::string porter_stem_once(std::string_view word);

// Repeats porter_stem_once until a fixed point is reached, so the result
// is idempotent. For most words one pass already is a fixed point; a few
// (e.g. "agreed" -> "agre" -> "agr") need a second.
std::string stem(std::string_view token);

}  // namespace tokexp
