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

// Little-endian binary model file:
//
//   "LRFWFM01" | u32 kind | u32 m | u32 m_c | u32 k | u32 rank | u64 n
//   | u32 vocab_size[m] | f32 b0 | f32 b[n] | f32 W[n*k]
//   | payload: dense  -> f32 upper triangle of R, row-major
//              pruned -> u32 q, then q × (u32 i, u32 j, f32 value)
//              DPLR   -> f32 U[rank*m], f32 e[rank]   (d derived on load)

#include <string>
#include <vector>

#include "core/model.hpp"

namespace lrfwfm {

inline constexpr char kModelMagic[8] = {'L', 'R', 'F', 'W', 'F', 'M', '0', '1'};

std::vector<char> serialize_model(const ModelParams& params);
ModelParams deserialize_model(std::span<const char> bytes);

void save_model(const std::string& path, const ModelParams& params);
ModelParams load_model(const std::string& path);

}  // namespace lrfwfm
