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

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace langclust {

using TokenSeq = std::vector<std::string>;

struct BleuReport {
  double bleu = 0.0;                     // 0..100
  std::array<double, 4> precisions{};    // clipped n-gram precisions, fractions
  std::array<std::size_t, 4> matches{};
  std::array<std::size_t, 4> totals{};
  double brevity_penalty = 0.0;
  std::size_t hyp_len = 0;
  std::size_t ref_len = 0;

  double ratio() const noexcept;
  /// "BLEU = 31.20, 70.0/40.0/25.0/12.5 (BP=1.000, ratio=1.000, hyp_len=10, ref_len=10)"
  std::string summary() const;
  std::string to_json() const;
  static BleuReport from_json(const std::string& text);
};

/// Corpus BLEU with one reference per hypothesis, case-sensitive, no
/// smoothing. An empty hypothesis side scores 0.
BleuReport corpus_bleu(const std::vector<TokenSeq>& hypotheses,
                       const std::vector<TokenSeq>& references);

/// Whitespace-splits each line first.
BleuReport corpus_bleu_text(const std::vector<std::string>& hypotheses,
                            const std::vector<std::string>& references);

}  // namespace langclust
