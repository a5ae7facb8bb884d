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

#pragma once

// Field schema, raw row ingestion, vocabulary building and sample encoding.
//
// A schema lists raw *columns*; each column produces one or more *fields*
// (a timestamp column expands into year, month, day-of-week and hour-of-day).
// Fields 0..m_c-1 are context fields, m_c..m-1 item fields, in column order.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace lrfwfm {

enum class FieldRole { kContext, kItem };

/// Kind of a derived field, after column expansion.
enum class FieldKind { kCategorical, kMulti, kNumeric };

/// Kind of a raw column as declared in the schema file.
enum class ColumnKind { kCategorical, kMulti, kNumeric, kTimestamp };

struct ColumnDef {
  std::string name;
  FieldRole role = FieldRole::kContext;
  ColumnKind kind = ColumnKind::kCategorical;
  std::string binning;  // numeric columns only; "ln2" is the only rule
};

struct FieldDef {
  std::string name;
  FieldRole role = FieldRole::kContext;
  FieldKind kind = FieldKind::kCategorical;
  std::uint32_t column = 0;      // source column index
  std::uint32_t vocab_size = 1;  // includes the rare bucket (id 0)
};

/// Token -> dense id map for one field. Id 0 is the rare bucket and has no
/// token; `tokens()[i]` is the token of id i+1.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> tokens);

  std::uint32_t lookup(const std::string& token) const;
  std::uint32_t size() const noexcept {
    return static_cast<std::uint32_t>(tokens_.size() + 1);
  }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::uint32_t> ids_;
};

inline constexpr std::uint32_t kRareId = 0;

class FieldSchema {
 public:
  FieldSchema() = default;
  /// Expands columns into fields and validates the role partition.
  explicit FieldSchema(std::vector<ColumnDef> columns);

  const std::vector<ColumnDef>& columns() const noexcept { return columns_; }
  const std::vector<FieldDef>& fields() const noexcept { return fields_; }
  std::size_t m() const noexcept { return fields_.size(); }
  std::size_t context_fields() const noexcept { return context_fields_; }

  char delimiter = '\t';
  char multi_separator = '|';
  std::uint32_t min_count = 10;

  bool has_vocab() const noexcept { return !vocabs_.empty(); }
  const std::vector<Vocabulary>& vocabs() const noexcept { return vocabs_; }
  void set_vocabs(std::vector<Vocabulary> vocabs);

  std::vector<std::uint32_t> vocab_sizes() const;

 private:
  std::vector<ColumnDef> columns_;
  std::vector<FieldDef> fields_;
  std::size_t context_fields_ = 0;
  std::vector<Vocabulary> vocabs_;
};

/// One line of a dataset file, split but not yet tokenized.
struct RawRow {
  std::string label;
  std::vector<std::string> columns;
  std::size_t line = 0;  // 1-based source line, 0 when synthetic
};

struct Feature {
  std::uint32_t id = 0;  // id within its field's vocabulary
  double weight = 1.0;

  bool operator==(const Feature&) const = default;
};

/// Active features of a contiguous run of fields, stored CSR-style.
class FieldValues {
 public:
  FieldValues() = default;

  std::size_t field_count() const noexcept {
    return offsets_.empty() ? 0 : offsets_.size() - 1;
  }
  std::span<const Feature> field(std::size_t local) const noexcept {
    return {features_.data() + offsets_[local],
            offsets_[local + 1] - offsets_[local]};
  }
  void add_field(std::span<const Feature> features);
  void add_single(std::uint32_t id) {
    const Feature f{id, 1.0};
    add_field({&f, 1});
  }

  /// Fields [begin, end) as a new block.
  FieldValues slice(std::size_t begin, std::size_t end) const;
  static FieldValues concat(const FieldValues& head, const FieldValues& tail);

  const std::vector<Feature>& features() const noexcept { return features_; }

  bool operator==(const FieldValues&) const = default;

 private:
  std::vector<std::uint32_t> offsets_;
  std::vector<Feature> features_;
};

struct Sample {
  double label = 0.0;
  FieldValues values;  // covers all m fields

  bool operator==(const Sample&) const = default;
};

/// One ranking request: a context block shared by every candidate item.
struct Auction {
  FieldValues context;             // fields 0..m_c-1
  std::vector<FieldValues> items;  // each covers fields m_c..m-1
};

/// Numeric binning: missing -> 0, negative -> 1, [0, 2] -> 2 + floor(x),
/// above 2 -> 5 + floor(ln(x)^2).
std::uint32_t bin_numeric(std::optional<double> x);

/// Per-field token lists of a raw row, after timestamp expansion and
/// numeric binning. Missing values are the empty token (multi: no tokens).
std::vector<std::vector<std::string>> tokenize_row(const RawRow& row,
                                                   const FieldSchema& schema);

/// Features seen at least `min_count` times get ids 1.. in lexicographic
/// token order; everything else maps to the rare id.
FieldSchema build_vocab(std::span<const RawRow> rows, const FieldSchema& schema,
                        std::uint32_t min_count);
inline FieldSchema build_vocab(std::span<const RawRow> rows,
                               const FieldSchema& schema) {
  return build_vocab(rows, schema, schema.min_count);
}

Sample encode_row(const RawRow& row, const FieldSchema& schema);
std::vector<Sample> encode_rows(std::span<const RawRow> rows,
                                const FieldSchema& schema);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
};

/// Seeded random 80/10/10 partition of 0..n-1.
SplitIndices split_indices(std::size_t n, std::uint64_t seed);

template <class T>
std::vector<T> select(std::span<const T> items,
                      std::span<const std::size_t> idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(items[i]);
  return out;
}

struct SplitRows {
  std::vector<RawRow> train;
  std::vector<RawRow> validation;
  std::vector<RawRow> test;
};
SplitRows split(std::span<const RawRow> rows, std::uint64_t seed);

/// Splits a full sample into its context block and item block.
std::pair<FieldValues, FieldValues> split_sample(const Sample& s,
                                                 std::size_t context_fields);

// File formats ------------------------------------------------------------

FieldSchema parse_schema(const std::string& text);
FieldSchema read_schema_file(const std::string& path);
std::string format_schema(const FieldSchema& schema);

std::vector<RawRow> parse_rows(const std::string& text,
                               const FieldSchema& schema);
std::vector<RawRow> read_rows_file(const std::string& path,
                                   const FieldSchema& schema);

/// Schema plus built vocabularies, as a JSON document.
std::string format_vocab(const FieldSchema& schema);
FieldSchema parse_vocab(const std::string& text);
void write_vocab_file(const std::string& path, const FieldSchema& schema);
FieldSchema read_vocab_file(const std::string& path);

std::string to_string(FieldRole role);
std::string to_string(ColumnKind kind);

}  // namespace lrfwfm
