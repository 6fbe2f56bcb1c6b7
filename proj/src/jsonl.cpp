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

#include "tokexp/jsonl.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include "tokexp/error.hpp"

namespace tokexp::io {
namespace {

std::string where(std::string_view source, std::size_t line) {
  return std::string(source) + ":" + std::to_string(line) + ": ";
}

const Json& field(const Json& record, std::string_view key,
                  std::string_view source, std::size_t line) {
  auto it = record.find(key);
  if (it == record.end()) {
    throw InputError(where(source, line) + "missing field '" +
                     std::string(key) + "'");
  }
  return *it;
}

bool is_blank(std::string_view s) {
  return s.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

}  // namespace

void for_each_record(std::istream& in, std::string_view source_name,
                     const std::function<void(const Json&, std::size_t)>& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    Json record;
    try {
      record = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw InputError(where(source_name, line_no) + "malformed record: " +
                       e.what());
    }
    if (!record.is_object()) {
      throw InputError(where(source_name, line_no) +
                       "malformed record: expected a JSON object");
    }
    if (record.contains(kMetaKey)) continue;
    fn(record, line_no);
  }
}

void for_each_record_in_file(
    const std::string& path,
    const std::function<void(const Json&, std::size_t)>& fn) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open input file: " + path);
  for_each_record(in, path, fn);
}

std::string require_string(const Json& record, std::string_view key,
                           std::string_view source, std::size_t line) {
  const Json& v = field(record, key, source, line);
  if (!v.is_string()) {
    throw InputError(where(source, line) + "field '" + std::string(key) +
                     "' must be a string");
  }
  return v.get<std::string>();
}

std::string optional_string(const Json& record, std::string_view key,
                            std::string_view source, std::size_t line) {
  auto it = record.find(key);
  if (it == record.end() || it->is_null()) return {};
  if (!it->is_string()) {
    throw InputError(where(source, line) + "field '" + std::string(key) +
                     "' must be a string");
  }
  return it->get<std::string>();
}

double require_number(const Json& record, std::string_view key,
                      std::string_view source, std::size_t line) {
  const Json& v = field(record, key, source, line);
  if (!v.is_number()) {
    throw InputError(where(source, line) + "field '" + std::string(key) +
                     "' must be a number");
  }
  return v.get<double>();
}

long long require_integer(const Json& record, std::string_view key,
                          std::string_view source, std::size_t line) {
  const Json& v = field(record, key, source, line);
  if (!v.is_number_integer()) {
    throw InputError(where(source, line) + "field '" + std::string(key) +
                     "' must be an integer");
  }
  return v.get<long long>();
}

void write_line(std::ostream& out, const Json& record) {
  out << record.dump() << '\n';
}

void write_meta(std::ostream& out, const Json& meta) {
  Json wrapped;
  wrapped[std::string(kMetaKey)] = meta;
  write_line(out, wrapped);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open input file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot open output file: " + path);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw InputError("failed writing output file: " + path);
}

}  // namespace tokexp::io
