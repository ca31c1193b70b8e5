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

#include "langclust/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

#include "langclust/error.hpp"

namespace langclust {
namespace {

std::atomic<int> g_level{static_cast<int>(LogLevel::kWarning)};
std::atomic<std::size_t> g_warnings{0};
std::mutex g_mutex;

}  // namespace

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kDimension: return "dimension";
    case ErrorKind::kIndex: return "index";
    case ErrorKind::kDomain: return "domain";
    case ErrorKind::kInput: return "input";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kLookup: return "lookup";
    case ErrorKind::kCoverage: return "coverage";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kDivergence: return "divergence";
  }
  return "unknown";
}

void set_log_level(LogLevel level) { g_level = static_cast<int>(level); }
LogLevel log_level() { return static_cast<LogLevel>(g_level.load()); }

void log_warning(const std::string& message) {
  ++g_warnings;
  if (g_level >= static_cast<int>(LogLevel::kWarning)) {
    std::lock_guard<std::mutex> lock(g_mutex);
    std::cerr << "warning: " << message << '\n';
  }
}

void log_info(const std::string& message) {
  if (g_level >= static_cast<int>(LogLevel::kInfo)) {
    std::lock_guard<std::mutex> lock(g_mutex);
    std::cerr << message << '\n';
  }
}

std::size_t warning_count() { return g_warnings; }

}  // namespace langclust
