// Copyright 2026 The langclust Authors
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

namespace langclust {

enum class ErrorKind {
  kDimension,  // shape or axis mismatch
  kIndex,      // id or index out of range
  kDomain,     // argument outside the mathematical domain
  kInput,      // invalid user input or configuration
  kParse,      // malformed file content
  kLookup,     // unknown language / symbol
  kCoverage,   // taxonomy does not cover a language
  kIo,         // file system failure
  kDivergence  // non-finite values during training
};

const char* to_string(ErrorKind kind);

/// Every failure in the library surfaces as an Error carrying a kind, so the
/// C API can map it onto a status code without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace langclust
