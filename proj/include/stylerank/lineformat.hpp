// stylerank/lineformat.hpp

// Copyright 2026  The stylerank Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Every text artifact (manifests, pairs, judgments, proxies, reports, configs,
// HTTP bodies) uses the same line format: UTF-8, one JSON object per line.
// Blank lines are skipped. Unknown keys are ignored by every reader.

#ifndef STYLERANK_LINEFORMAT_HPP_
#define STYLERANK_LINEFORMAT_HPP_

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "stylerank/error.hpp"

namespace stylerank {

using Json = nlohmann::ordered_json;

struct Line {
  std::size_t number;  // 1-based
  Json object;
};

inline bool is_blank(std::string_view s) {
  return s.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

inline std::vector<Line> parse_lines(std::istream &in) {
  std::vector<Line> out;
  std::string text;
  std::size_t number = 0;
  while (std::getline(in, text)) {
    ++number;
    if (is_blank(text)) continue;
    Json obj;
    try {
      obj = Json::parse(text);
    } catch (const Json::parse_error &e) {
      throw ParseError(std::string("not a JSON object: ") + e.what(), number);
    }
    if (!obj.is_object()) throw ParseError("not a JSON object", number);
    out.push_back({number, std::move(obj)});
  }
  return out;
}

inline std::vector<Line> parse_lines(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_lines(in);
}

inline std::vector<Line> read_lines(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_lines(in);
}

inline void write_lines(const std::filesystem::path &path,
                       const std::vector<Json> &objects) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto &o : objects) out << o.dump() << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

// Typed field access with errors that name the line and key.

inline const Json &require_key(const Line &line, const char *key) {
  auto it = line.object.find(key);
  if (it == line.object.end())
    throw ParseError(std::string("missing key '") + key + "'", line.number);
  return *it;
}

inline std::string get_string(const Line &line, const char *key) {
  const Json &v = require_key(line, key);
  if (!v.is_string())
    throw ParseError(std::string("key '") + key + "' must be a string",
                     line.number);
  return v.get<std::string>();
}

inline double get_number(const Line &line, const char *key) {
  const Json &v = require_key(line, key);
  if (!v.is_number())
    throw ParseError(std::string("key '") + key + "' must be a number",
                     line.number);
  return v.get<double>();
}

inline std::optional<double> get_optional_number(const Line &line,
                                               const char *key) {
  auto it = line.object.find(key);
  if (it == line.object.end() || it->is_null()) return std::nullopt;
  if (!it->is_number())
    throw ParseError(std::string("key '") + key + "' must be a number or null",
                     line.number);
  return it->get<double>();
}

inline long long get_integer(const Line &line, const char *key) {
  const Json &v = require_key(line, key);
  if (v.is_number_integer()) return v.get<long long>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::floor(d) == d) return static_cast<long long>(d);
  }
  throw ParseError(std::string("key '") + key + "' must be an integer",
                   line.number);
}

inline bool get_bool(const Line &line, const char *key) {
  const Json &v = require_key(line, key);
  if (!v.is_boolean())
    throw ParseError(std::string("key '") + key + "' must be a boolean",
                     line.number);
  return v.get<bool>();
}

inline Json optional_to_json(const std::optional<double> &v) {
  return v ? Json(*v) : Json(nullptr);
}

}  // namespace stylerank

#endif  // STYLERANK_LINEFORMAT_HPP_
