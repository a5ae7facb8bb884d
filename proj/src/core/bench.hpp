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

// Synthetic auction latency experiment over random models: DPLR engines of
// several ranks against pruned engines with the same parameter budget.

#include <cstdint>
#include <string>
#include <vector>

namespace lrfwfm {

struct BenchGrid {
  std::size_t m = 40;
  std::vector<std::size_t> context_counts{10, 15, 20, 25, 30};
  std::vector<std::size_t> ranks{1, 2, 3};
  std::vector<std::size_t> auction_sizes{10, 50, 100, 500, 1000};
  std::size_t repetitions = 50;
  std::size_t auctions_per_measurement = 10;
  std::size_t k = 8;
  std::uint64_t seed = 0;
  bool baselines = false;  // also time the FM and dense FwFM engines
};

void validate(const BenchGrid& grid);

struct BenchRecord {
  std::string engine;  // dplr, pruned, fm, fwfm
  std::uint64_t rank_or_keep = 0;
  std::size_t m = 0;
  std::size_t context_fields = 0;
  std::size_t auction_size = 0;
  std::size_t rep = 0;
  std::uint64_t total_ns = 0;  // per auction
  double per_item_ns = 0.0;
  std::uint64_t per_item_ops = 0;
  bool low_resolution = false;  // measurement shorter than 1µs
};

/// Throws if an engine disagrees with the brute-force oracle.
std::vector<BenchRecord> run_grid(const BenchGrid& grid);

struct BenchSummary {
  std::string engine;
  std::uint64_t rank_or_keep = 0;
  std::size_t m = 0;
  std::size_t context_fields = 0;
  std::size_t auction_size = 0;
  std::size_t reps = 0;
  double mean_total_ns = 0.0;
  double se_total_ns = 0.0;
  double mean_per_item_ns = 0.0;
  double se_per_item_ns = 0.0;
  std::uint64_t per_item_ops = 0;
};

/// Mean and standard error (sample stddev / √reps) per configuration, in
/// first-appearance order. Throws when a configuration has fewer than 2 records.
std::vector<BenchSummary> summarize(const std::vector<BenchRecord>& records);

inline constexpr const char* kBenchHeader =
    "engine,rank_or_keep,m,context_fields,auction_size,rep,total_ns,per_item_ns,"
    "per_item_ops";

std::string format_records(const std::vector<BenchRecord>& records);
std::string format_summary(const std::vector<BenchSummary>& rows);

}  // namespace lrfwfm
