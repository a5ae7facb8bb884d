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

#include "core/schema.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include "json.hpp"

#include "core/error.hpp"
#include "core/io.hpp"
#include "core/random.hpp"

namespace lrfwfm {

namespace {

constexpr const char* kTimestampParts[] = {"year", "month", "dow", "hour"};
constexpr const char* kVocabFormat = "lrfwfm-vocab-1";

std::string where(const RawRow& row) {
  return row.line ? "line " + std::to_string(row.line) : "row";
}

std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  double value = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw_data("not a number: '" + s + "'");
  }
  return value;
}

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t begin = 0;
  while (true) {
    const auto pos = s.find(sep, begin);
    if (pos == std::string::npos) {
      out.push_back(s.substr(begin));
      return out;
    }
    out.push_back(s.substr(begin, pos - begin));
    begin = pos + 1;
  }
}

FieldKind field_kind_of(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::kMulti: return FieldKind::kMulti;
    case ColumnKind::kNumeric: return FieldKind::kNumeric;
    case ColumnKind::kCategorical:
    case ColumnKind::kTimestamp: break;
  }
  return FieldKind::kCategorical;
}

FieldRole parse_role(const std::string& s, const std::string& column) {
  if (s == "context") return FieldRole::kContext;
  if (s == "item") return FieldRole::kItem;
  throw_data("column '" + column + "': unknown role '" + s + "'");
}

ColumnKind parse_kind(const std::string& s, const std::string& column) {
  if (s == "categorical") return ColumnKind::kCategorical;
  if (s == "multi") return ColumnKind::kMulti;
  if (s == "numeric") return ColumnKind::kNumeric;
  if (s == "timestamp") return ColumnKind::kTimestamp;
  throw_data("column '" + column + "': unknown kind '" + s + "'");
}

char parse_delimiter(const std::string& s) {
  if (s == "tab" || s == "\\t") return '\t';
  if (s == "comma") return ',';
  if (s == "semicolon") return ';';
  if (s == "space") return ' ';
  if (s == "pipe") return '|';
  if (s.size() == 1) return s[0];
  throw_data("unsupported delimiter '" + s + "'");
}

std::string delimiter_name(char c) {
  switch (c) {
    case '\t': return "tab";
    case ',': return "comma";
    case ';': return "semicolon";
    case ' ': return "space";
    case '|': return "pipe";
    default: return std::string(1, c);
  }
}

}  // namespace

std::string to_string(FieldRole role) {
  return role == FieldRole::kContext ? "context" : "item";
}

std::string to_string(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::kCategorical: return "categorical";
    case ColumnKind::kMulti: return "multi";
    case ColumnKind::kNumeric: return "numeric";
    case ColumnKind::kTimestamp: return "timestamp";
  }
  return "categorical";
}

// Vocabulary -------------------------------------------------------------

Vocabulary::Vocabulary(std::vector<std::string> tokens)
    : tokens_(std::move(tokens)) {
  ids_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!ids_.emplace(tokens_[i], static_cast<std::uint32_t>(i + 1)).second) {
      throw_data("duplicate vocabulary token '" + tokens_[i] + "'");
    }
  }
}

std::uint32_t Vocabulary::lookup(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kRareId : it->second;
}

// FieldSchema ------------------------------------------------------------

FieldSchema::FieldSchema(std::vector<ColumnDef> columns)
    : columns_(std::move(columns)) {
  std::set<std::string> names;
  for (std::uint32_t c = 0; c < columns_.size(); ++c) {
    const auto& col = columns_[c];
    if (col.kind == ColumnKind::kNumeric && !col.binning.empty() &&
        col.binning != "ln2") {
      throw_data("column '" + col.name + "': unknown binning rule '" +
                 col.binning + "'");
    }
    auto push = [&](std::string name, FieldKind kind) {
      if (!names.insert(name).second) {
        throw_data("duplicate field name '" + name + "'");
      }
      fields_.push_back(FieldDef{std::move(name), col.role, kind, c, 1});
    };
    if (col.kind == ColumnKind::kTimestamp) {
      for (const char* part : kTimestampParts) {
        push(col.name + "_" + part, FieldKind::kCategorical);
      }
    } else {
      push(col.name, field_kind_of(col.kind));
    }
  }
  while (context_fields_ < fields_.size() &&
         fields_[context_fields_].role == FieldRole::kContext) {
    ++context_fields_;
  }
  for (std::size_t f = context_fields_; f < fields_.size(); ++f) {
    if (fields_[f].role == FieldRole::kContext) {
      throw_data("context field '" + fields_[f].name +
                 "' follows an item field; context columns must come first");
    }
  }
  if (context_fields_ < 1 || context_fields_ >= fields_.size()) {
    throw_data("schema needs at least one context and one item field");
  }
}

void FieldSchema::set_vocabs(std::vector<Vocabulary> vocabs) {
  if (vocabs.size() != fields_.size()) {
    throw_invalid("vocabulary count does not match field count");
  }
  vocabs_ = std::move(vocabs);
  for (std::size_t f = 0; f < fields_.size(); ++f) {
    fields_[f].vocab_size = vocabs_[f].size();
  }
}

std::vector<std::uint32_t> FieldSchema::vocab_sizes() const {
  std::vector<std::uint32_t> out;
  out.reserve(fields_.size());
  for (const auto& f : fields_) out.push_back(f.vocab_size);
  return out;
}

// FieldValues ------------------------------------------------------------

void FieldValues::add_field(std::span<const Feature> features) {
  if (offsets_.empty()) offsets_.push_back(0);
  features_.insert(features_.end(), features.begin(), features.end());
  offsets_.push_back(static_cast<std::uint32_t>(features_.size()));
}

FieldValues FieldValues::slice(std::size_t begin, std::size_t end) const {
  FieldValues out;
  for (std::size_t f = begin; f < end; ++f) out.add_field(field(f));
  return out;
}

FieldValues FieldValues::concat(const FieldValues& head,
                                const FieldValues& tail) {
  FieldValues out = head;
  for (std::size_t f = 0; f < tail.field_count(); ++f) {
    out.add_field(tail.field(f));
  }
  return out;
}

std::pair<FieldValues, FieldValues> split_sample(const Sample& s,
                                                 std::size_t context_fields) {
  const auto m = s.values.field_count();
  return {s.values.slice(0, context_fields),
          s.values.slice(context_fields, m)};
}

// Tokenization and encoding ----------------------------------------------

std::uint32_t bin_numeric(std::optional<double> x) {
  if (!x) return 0;
  const double v = *x;
  if (v < 0.0) return 1;
  if (v <= 2.0) return 2 + static_cast<std::uint32_t>(std::floor(v));
  const double l = std::log(v);
  return 5 + static_cast<std::uint32_t>(std::floor(l * l));
}

std::vector<std::vector<std::string>> tokenize_row(const RawRow& row,
                                                   const FieldSchema& schema) {
  const auto& columns = schema.columns();
  if (row.columns.size() != columns.size()) {
    throw_data(where(row) + ": expected " + std::to_string(columns.size()) +
               " columns, found " + std::to_string(row.columns.size()));
  }
  std::vector<std::vector<std::string>> out;
  out.reserve(schema.m());
  for (std::size_t c = 0; c < columns.size(); ++c) {
    const std::string& value = row.columns[c];
    try {
      switch (columns[c].kind) {
        case ColumnKind::kCategorical:
          out.push_back({value});
          break;
        case ColumnKind::kMulti:
          if (value.empty()) {
            out.emplace_back();
          } else {
            out.push_back(split_on(value, schema.multi_separator));
          }
          break;
        case ColumnKind::kNumeric:
          out.push_back({"b" + std::to_string(bin_numeric(parse_number(value)))});
          break;
        case ColumnKind::kTimestamp: {
          if (value.empty()) {
            for (int p = 0; p < 4; ++p) out.push_back({""});
            break;
          }
          using namespace std::chrono;
          const auto secs = parse_number(value).value();
          const sys_seconds tp{seconds{static_cast<long long>(secs)}};
          const auto day = floor<days>(tp);
          const year_month_day ymd{day};
          const weekday wd{day};
          const auto hour = duration_cast<hours>(tp - day).count();
          out.push_back({std::to_string(static_cast<int>(ymd.year()))});
          out.push_back({std::to_string(static_cast<unsigned>(ymd.month()))});
          out.push_back({std::to_string(wd.c_encoding())});
          out.push_back({std::to_string(hour)});
          break;
        }
      }
    } catch (const Error& e) {
      throw_data(where(row) + ", column '" + columns[c].name + "': " + e.what());
    }
  }
  return out;
}

FieldSchema build_vocab(std::span<const RawRow> rows, const FieldSchema& schema,
                        std::uint32_t min_count) {
  if (rows.empty()) throw_data("cannot build vocabulary from an empty training set");
  std::vector<std::unordered_map<std::string, std::uint64_t>> counts(schema.m());
  for (const auto& row : rows) {
    auto tokens = tokenize_row(row, schema);
    for (std::size_t f = 0; f < tokens.size(); ++f) {
      for (auto& t : tokens[f]) ++counts[f][std::move(t)];
    }
  }
  std::vector<Vocabulary> vocabs;
  vocabs.reserve(schema.m());
  for (auto& field_counts : counts) {
    std::vector<std::string> kept;
    for (auto& [token, count] : field_counts) {
      if (count >= min_count) kept.push_back(token);
    }
    std::sort(kept.begin(), kept.end());
    vocabs.emplace_back(std::move(kept));
  }
  FieldSchema out = schema;
  out.min_count = min_count;
  out.set_vocabs(std::move(vocabs));
  return out;
}

Sample encode_row(const RawRow& row, const FieldSchema& schema) {
  if (!schema.has_vocab()) throw_invalid("encode_row: vocabulary not built");
  Sample s;
  try {
    s.label = parse_number(row.label).value();
  } catch (const std::exception&) {
    throw_data(where(row) + ": invalid label '" + row.label + "'");
  }
  const auto tokens = tokenize_row(row, schema);
  const auto& vocabs = schema.vocabs();
  std::vector<Feature> buf;
  for (std::size_t f = 0; f < tokens.size(); ++f) {
    buf.clear();
    if (tokens[f].empty()) {
      buf.push_back({kRareId, 1.0});
    } else {
      const double w = 1.0 / static_cast<double>(tokens[f].size());
      for (const auto& t : tokens[f]) buf.push_back({vocabs[f].lookup(t), w});
    }
    s.values.add_field(buf);
  }
  return s;
}

std::vector<Sample> encode_rows(std::span<const RawRow> rows,
                                const FieldSchema& schema) {
  std::vector<Sample> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(encode_row(r, schema));
  return out;
}

// Splitting --------------------------------------------------------------

SplitIndices split_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  Rng rng(seed);
  shuffle(idx, rng);
  const auto n_train = static_cast<std::size_t>(std::llround(0.8 * n));
  const auto n_val = static_cast<std::size_t>(std::llround(0.1 * n));
  SplitIndices out;
  out.train.assign(idx.begin(), idx.begin() + n_train);
  out.validation.assign(idx.begin() + n_train, idx.begin() + n_train + n_val);
  out.test.assign(idx.begin() + n_train + n_val, idx.end());
  return out;
}

SplitRows split(std::span<const RawRow> rows, std::uint64_t seed) {
  const auto idx = split_indices(rows.size(), seed);
  return {select(rows, std::span<const std::size_t>(idx.train)),
          select(rows, std::span<const std::size_t>(idx.validation)),
          select(rows, std::span<const std::size_t>(idx.test))};
}

// Schema file ------------------------------------------------------------

FieldSchema parse_schema(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw_data(std::string("schema: ") + e.what());
  }
  char delimiter = '\t';
  char multi = '|';
  std::uint32_t min_count = 10;
  std::vector<ColumnDef> columns;
  for (const auto& [section, body] : tree) {
    if (section == "schema") {
      for (const auto& [key, value] : body) {
        const auto v = value.get_value<std::string>();
        if (key == "delimiter") {
          delimiter = parse_delimiter(v);
        } else if (key == "multi_separator") {
          multi = parse_delimiter(v);
        } else if (key == "min_count") {
          min_count = static_cast<std::uint32_t>(std::stoul(v));
        } else {
          throw_data("schema: unknown key '" + key + "' in [schema]");
        }
      }
      continue;
    }
    constexpr std::string_view kPrefix = "field ";
    if (section.rfind(kPrefix, 0) != 0 || section.size() == kPrefix.size()) {
      throw_data("schema: unexpected section [" + section + "]");
    }
    ColumnDef col;
    col.name = section.substr(kPrefix.size());
    bool has_role = false;
    for (const auto& [key, value] : body) {
      const auto v = value.get_value<std::string>();
      if (key == "role") {
        col.role = parse_role(v, col.name);
        has_role = true;
      } else if (key == "kind") {
        col.kind = parse_kind(v, col.name);
      } else if (key == "binning") {
        col.binning = v;
      } else {
        throw_data("schema: unknown key '" + key + "' for column '" +
                   col.name + "'");
      }
    }
    if (!has_role) throw_data("schema: column '" + col.name + "' has no role");
    if (col.kind == ColumnKind::kNumeric && col.binning.empty()) {
      col.binning = "ln2";
    }
    columns.push_back(std::move(col));
  }
  if (columns.empty()) throw_data("schema: no [field ...] sections");
  FieldSchema schema(std::move(columns));
  schema.delimiter = delimiter;
  schema.multi_separator = multi;
  schema.min_count = min_count;
  return schema;
}

FieldSchema read_schema_file(const std::string& path) {
  return parse_schema(read_file(path));
}

std::string format_schema(const FieldSchema& schema) {
  std::ostringstream out;
  out << "[schema]\n"
      << "delimiter = " << delimiter_name(schema.delimiter) << "\n"
      << "multi_separator = " << delimiter_name(schema.multi_separator) << "\n"
      << "min_count = " << schema.min_count << "\n";
  for (const auto& col : schema.columns()) {
    out << "\n[field " << col.name << "]\n"
        << "role = " << to_string(col.role) << "\n"
        << "kind = " << to_string(col.kind) << "\n";
    if (col.kind == ColumnKind::kNumeric) out << "binning = " << col.binning << "\n";
  }
  return out.str();
}

// Dataset files ----------------------------------------------------------

std::vector<RawRow> parse_rows(const std::string& text,
                               const FieldSchema& schema) {
  std::vector<RawRow> rows;
  const std::size_t expected = schema.columns().size() + 1;
  std::size_t line_no = 0;
  std::size_t begin = 0;
  while (begin < text.size()) {
    auto end = text.find('\n', begin);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(begin, end - begin);
    begin = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_on(line, schema.delimiter);
    if (cells.size() != expected) {
      throw_data("line " + std::to_string(line_no) + ": expected " +
                 std::to_string(expected) + " cells (label + " +
                 std::to_string(expected - 1) + " columns), found " +
                 std::to_string(cells.size()));
    }
    RawRow row;
    row.label = std::move(cells.front());
    row.columns.assign(std::make_move_iterator(cells.begin() + 1),
                       std::make_move_iterator(cells.end()));
    row.line = line_no;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<RawRow> read_rows_file(const std::string& path,
                                   const FieldSchema& schema) {
  return parse_rows(read_file(path), schema);
}

// Vocabulary sidecar -----------------------------------------------------

std::string format_vocab(const FieldSchema& schema) {
  using nlohmann::json;
  json doc;
  doc["format"] = kVocabFormat;
  doc["delimiter"] = std::string(1, schema.delimiter);
  doc["multi_separator"] = std::string(1, schema.multi_separator);
  doc["min_count"] = schema.min_count;
  json cols = json::array();
  for (const auto& c : schema.columns()) {
    cols.push_back({{"name", c.name},
                    {"role", to_string(c.role)},
                    {"kind", to_string(c.kind)},
                    {"binning", c.binning}});
  }
  doc["columns"] = std::move(cols);
  json vocab = json::array();
  for (const auto& v : schema.vocabs()) vocab.push_back(v.tokens());
  doc["vocab"] = std::move(vocab);
  return doc.dump(1, ' ', false, json::error_handler_t::replace) + "\n";
}

FieldSchema parse_vocab(const std::string& text) {
  using nlohmann::json;
  try {
    const auto doc = json::parse(text);
    if (doc.at("format") != kVocabFormat) throw_data("vocab: unknown format tag");
    std::vector<ColumnDef> columns;
    for (const auto& c : doc.at("columns")) {
      ColumnDef col;
      col.name = c.at("name").get<std::string>();
      col.role = parse_role(c.at("role").get<std::string>(), col.name);
      col.kind = parse_kind(c.at("kind").get<std::string>(), col.name);
      col.binning = c.at("binning").get<std::string>();
      columns.push_back(std::move(col));
    }
    FieldSchema schema(std::move(columns));
    schema.delimiter = doc.at("delimiter").get<std::string>().at(0);
    schema.multi_separator = doc.at("multi_separator").get<std::string>().at(0);
    schema.min_count = doc.at("min_count").get<std::uint32_t>();
    std::vector<Vocabulary> vocabs;
    for (const auto& v : doc.at("vocab")) {
      vocabs.emplace_back(v.get<std::vector<std::string>>());
    }
    schema.set_vocabs(std::move(vocabs));
    return schema;
  } catch (const json::exception& e) {
    throw_data(std::string("vocab: ") + e.what());
  } catch (const std::out_of_range& e) {
    throw_data(std::string("vocab: ") + e.what());
  }
}

void write_vocab_file(const std::string& path, const FieldSchema& schema) {
  write_file(path, format_vocab(schema));
}

FieldSchema read_vocab_file(const std::string& path) {
  return parse_vocab(read_file(path));
}

}  // namespace lrfwfm
