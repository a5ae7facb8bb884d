// Copyright (c) 2026 The lrfwfm Authors. All Rights Reserved.
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

#include "core/movielens.hpp"

#include <string_view>
#include <unordered_map>
#include <vector>

#include "core/error.hpp"
#include "core/io.hpp"

namespace lrfwfm {
namespace {

std::vector<std::string_view> split_colons(std::string_view line) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find("::", start);
    if (pos == std::string_view::npos) {
      parts.push_back(line.substr(start));
      return parts;
    }
    parts.push_back(line.substr(start, pos - start));
    start = pos + 2;
  }
}

template <class Fn>
void for_each_line(const std::string& path, std::size_t expected, Fn&& fn) {
  const std::string text = read_file(path);
  std::string_view rest(text);
  std::size_t line_no = 0;
  while (!rest.empty()) {
    const auto nl = rest.find('\n');
    std::string_view line = rest.substr(0, nl);
    rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto parts = split_colons(line);
    if (parts.size() != expected) {
      throw_data(path + ":" + std::to_string(line_no) + ": expected " +
                 std::to_string(expected) + " '::'-separated fields, got " +
                 std::to_string(parts.size()));
    }
    fn(parts, line_no);
  }
}

bool clean(std::string_view s) {
  return s.find('\t') == std::string_view::npos;
}

}  // namespace

FieldSchema movielens_schema() {
  auto col = [](const char* name, FieldRole role, ColumnKind kind) {
    return ColumnDef{name, role, kind, ""};
  };
  FieldSchema schema({
      col("user_id", FieldRole::kContext, ColumnKind::kCategorical),
      col("gender", FieldRole::kContext, ColumnKind::kCategorical),
      col("age", FieldRole::kContext, ColumnKind::kCategorical),
      col("occupation", FieldRole::kContext, ColumnKind::kCategorical),
      col("zip", FieldRole::kContext, ColumnKind::kCategorical),
      col("time", FieldRole::kContext, ColumnKind::kTimestamp),
      col("movie_id", FieldRole::kItem, ColumnKind::kCategorical),
      col("genres", FieldRole::kItem, ColumnKind::kMulti),
  });
  schema.delimiter = '\t';
  schema.multi_separator = '|';
  schema.min_count = 10;
  return schema;
}

IngestResult ingest_movielens(const std::string& dir, const std::string& data_out,
                              const std::string& schema_out) {
  const std::string base = dir.empty() || dir.back() == '/' ? dir : dir + "/";

  std::unordered_map<std::string, std::string> users;  // id -> tab-joined attrs
  for_each_line(base + "users.dat", 5, [&](const auto& p, std::size_t line) {
    for (const auto& s : p) {
      if (!clean(s)) throw_data(base + "users.dat:" + std::to_string(line) + ": tab in value");
    }
    users[std::string(p[0])] = std::string(p[0]) + '\t' + std::string(p[1]) + '\t' +
                               std::string(p[2]) + '\t' + std::string(p[3]) + '\t' +
                               std::string(p[4]);
  });

  std::unordered_map<std::string, std::string> movies;  // id -> genres
  for_each_line(base + "movies.dat", 3, [&](const auto& p, std::size_t line) {
    if (!clean(p[0]) || !clean(p[2])) {
      throw_data(base + "movies.dat:" + std::to_string(line) + ": tab in value");
    }
    movies[std::string(p[0])] = std::string(p[2]);
  });

  IngestResult result;
  result.users = users.size();
  result.movies = movies.size();
  std::string out;
  for_each_line(base + "ratings.dat", 4, [&](const auto& p, std::size_t line) {
    const auto u = users.find(std::string(p[0]));
    const auto mv = movies.find(std::string(p[1]));
    if (u == users.end() || mv == movies.end()) {
      throw_data(base + "ratings.dat:" + std::to_string(line) +
                 ": unknown user or movie id");
    }
    out.append(p[2]);
    out += '\t';
    out += u->second;
    out += '\t';
    out.append(p[3]);
    out += '\t';
    out.append(p[1]);
    out += '\t';
    out += mv->second;
    out += '\n';
    ++result.rows;
  });
  if (result.rows == 0) throw_data(base + "ratings.dat: no ratings");

  write_file(data_out, out);
  write_file(schema_out, format_schema(movielens_schema()));
  return result;
}

}  // namespace lrfwfm
