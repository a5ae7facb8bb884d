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

// Conversion of the MovieLens-1M "::"-separated files into a tab-separated
// dataset plus schema. Context fields: user id, gender, age, occupation, zip
// code and the rating timestamp; item fields: movie id and its genres.

#include <cstddef>
#include <string>

#include "core/schema.hpp"

namespace lrfwfm {

FieldSchema movielens_schema();

struct IngestResult {
  std::size_t rows = 0;
  std::size_t users = 0;
  std::size_t movies = 0;
};

/// Reads ratings.dat, users.dat and movies.dat from `dir`.
IngestResult ingest_movielens(const std::string& dir,
                              const std::string& data_out,
                              const std::string& schema_out);

}  // namespace lrfwfm
