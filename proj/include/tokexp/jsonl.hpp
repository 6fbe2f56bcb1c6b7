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

// Line-delimited JSON helpers shared by every loader and writer.

#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>

#include "json.hpp"

namespace tokexp::io {

using Json = nlohmann::json;

// Key of the optional provenance record that writers place on the first
// line of every artifact. Readers skip it.
inline constexpr std::string_view kMetaKey = "_meta";

// Calls `fn(record, line_number)` for every non-blank, non-meta line.
// Malformed JSON raises InputError naming `source_name` and the line.
void for_each_record(std::istream& in, std::string_view source_name,
                     const std::function<void(const Json&, std::size_t)>& fn);

// Same as above, opening `path`. A missing file raises InputError naming it.
void for_each_record_in_file(
    const std::string& path,
    const std::function<void(const Json&, std::size_t)>& fn);

// Field accessors raising InputError("<source>:<line>: ...") on type errors.
std::string require_string(const Json& record, std::string_view key,
                           std::string_view source, std::size_t line);
std::string optional_string(const Json& record, std::string_view key,
                            std::string_view source, std::size_t line);
double require_number(const Json& record, std::string_view key,
                      std::string_view source, std::size_t line);
long long require_integer(const Json& record, std::string_view key,
                          std::string_view source, std::size_t line);

// Writes one compact JSON document per line.
void write_line(std::ostream& out, const Json& record);
void write_meta(std::ostream& out, const Json& meta);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace tokexp::io
