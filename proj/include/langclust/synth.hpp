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

#include <cstdint>
#include <string>
#include <vector>

#include "langclust/cluster.hpp"
#include "langclust/data.hpp"

namespace langclust {

struct SynthConfig {
  std::uint64_t seed = 1;
  std::size_t sentences = 3000;
  std::size_t min_len = 3;          // pivot words per sentence
  std::size_t max_len = 12;
  double shared_fraction = 0.8;     // mapping shared by the two dialects of a family
  double train_fraction = 0.9;
  double dev_fraction = 0.05;       // the rest is test
};

struct SynthLanguage {
  std::string code;
  std::string family;
  std::vector<std::string> sentences;  // parallel to the pivot sentences
};

/// Six languages in three planted families:
///   a1, a2  word-for-word relexifications of the pivot over one inventory
///   b1, b2  reversed word order over a disjoint inventory
///   c1, c2  stem plus class-suffix tokens, stems drawn from the a inventory
///           under a different mapping
/// Dialects of a family share `shared_fraction` of their word mapping; the
/// rest uses dialect-only words.
struct SynthHarness {
  std::vector<std::string> pivot;
  std::vector<SynthLanguage> languages;
  std::vector<std::size_t> train, dev, test;  // sentence indices
  ClusterAssignment planted;
  TaxonomyTable taxonomy;

  std::vector<std::string> codes() const;
};

SynthHarness build_synthetic_harness(const SynthConfig& config);

struct SynthFiles {
  std::string train_manifest, dev_manifest, test_manifest, taxonomy, planted;
};

/// Writes "<code>.<split>.tsv" (language<TAB>pivot), one manifest per split,
/// the taxonomy TSV and the planted partition JSON into `dir`.
SynthFiles write_synthetic_harness(const SynthHarness& harness, const std::string& dir);

/// Word types of a language over the given sentences (suffix tokens of
/// split words included).
std::vector<std::string> vocabulary_types(const SynthLanguage& language);

}  // namespace langclust
