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

// Writes the synthetic dataset used by the CLI test.
// usage: lrfwfm_synth <prefix> <rows> <seed>

#include <cstdio>
#include <cstdlib>
#include <exception>

#include "common/synth.hpp"

int main(int argc, char** argv) {
  if (argc != 4) {
    std::fprintf(stderr, "usage: %s <prefix> <rows> <seed>\n", argv[0]);
    return 2;
  }
  try {
    const auto paths = testutil::write_synthetic(argv[1], std::strtoull(argv[2], nullptr, 10),
                                                 std::strtoull(argv[3], nullptr, 10));
    std::printf("%s\n%s\n", paths.schema.c_str(), paths.data.c_str());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
