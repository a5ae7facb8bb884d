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

#include <stdexcept>
#include <string>

namespace lrfwfm {

/// Broad failure classes. The C API and the CLI map these onto status and
/// exit codes, so every throw site picks the category a caller can act on.
enum class ErrorKind {
  kInvalidArgument,  // caller passed something inconsistent
  kData,             // malformed or mismatched input data
  kNumeric,          // non-finite values, divergence, non-convergence
  kFormat,           // corrupt or unsupported model file
  kIo,               // file could not be opened, read or written
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void throw_invalid(const std::string& what) {
  throw Error(ErrorKind::kInvalidArgument, what);
}
[[noreturn]] inline void throw_data(const std::string& what) {
  throw Error(ErrorKind::kData, what);
}
[[noreturn]] inline void throw_numeric(const std::string& what) {
  throw Error(ErrorKind::kNumeric, what);
}
[[noreturn]] inline void throw_format(const std::string& what) {
  throw Error(ErrorKind::kFormat, what);
}
[[noreturn]] inline void throw_io(const std::string& what) {
  throw Error(ErrorKind::kIo, what);
}

}  // namespace lrfwfm
