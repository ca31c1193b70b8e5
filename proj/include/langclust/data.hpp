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
#include <deque>
#include <string>
#include <vector>

#include "langclust/model.hpp"
#include "langclust/rng.hpp"
#include "langclust/subword.hpp"

namespace langclust {

enum class Direction { kToPivot, kFromPivot };

const char* to_string(Direction d);
Direction parse_direction(std::string_view text);

struct SentencePair {
  std::vector<TokenId> src;
  std::vector<TokenId> tgt;
  friend bool operator==(const SentencePair&, const SentencePair&) = default;
};

struct ParallelCorpus {
  std::string lang_code;
  Direction direction = Direction::kToPivot;
  std::vector<SentencePair> pairs;

  std::size_t size() const noexcept { return pairs.size(); }
};

struct ManifestEntry {
  std::string lang_code;
  std::string path;
  Direction direction = Direction::kToPivot;
};

/// "lang_code<TAB>path<TAB>direction" lines; relative paths resolve against
/// the manifest's directory.
std::vector<ManifestEntry> load_manifest(const std::string& path);
void save_manifest(const std::vector<ManifestEntry>& entries, const std::string& path);

/// Raw "source<TAB>target" lines of a corpus file.
std::vector<std::pair<std::string, std::string>> read_parallel_text(const std::string& path);

/// Loads and encodes a corpus. An empty file yields an empty corpus and a
/// warning; a line without a tab is a parse error naming the line.
ParallelCorpus load_corpus(const std::string& path, const std::string& lang_code,
                           Direction direction, const BpeCodec& codec, const Vocabulary& vocab);

/// Keeps round(fraction * size) pairs (at least one), chosen without
/// replacement in a seeded order that preserves the original pair order.
ParallelCorpus subsample(const ParallelCorpus& corpus, double fraction, std::uint64_t seed);

/// Equalizes every corpus to the largest size: original pairs are kept and
/// the shortfall is drawn with replacement.
std::vector<ParallelCorpus> upsample(std::vector<ParallelCorpus> corpora, std::uint64_t seed);

struct LanguageGroup {
  std::size_t corpus = 0;             // index into the stream's corpora
  std::vector<std::size_t> pairs;     // indices into that corpus
  std::size_t source_tokens = 0;
};

/// One group per language; all groups train together in one step.
struct MultilingualBatch {
  std::vector<LanguageGroup> groups;

  std::size_t source_tokens() const;
};

/// Endless seeded batch stream. Each language walks its own shuffled epochs,
/// so every batch carries every language and every pair appears once per
/// epoch of its language.
class BatchStream {
 public:
  BatchStream(const std::vector<ParallelCorpus>& corpora, std::size_t tokens_per_lang,
              std::uint64_t seed);

  MultilingualBatch next();
  std::size_t epoch(std::size_t corpus) const { return lanes_.at(corpus).epoch; }
  std::size_t oversize_groups() const noexcept { return oversize_; }

  /// Groups of one epoch for one corpus, as the stream would emit them.
  std::vector<LanguageGroup> plan_epoch(std::size_t corpus, Rng& rng);

  /// Flattens a batch into model examples, mapping corpus index to model
  /// language id through `lang_ids`.
  std::vector<Example> examples(const MultilingualBatch& batch,
                                const std::vector<std::size_t>& lang_ids) const;

 private:
  struct Lane {
    Rng rng;
    std::deque<LanguageGroup> pending;
    std::size_t epoch = 0;
  };

  const std::vector<ParallelCorpus>& corpora_;
  std::size_t budget_;
  std::vector<Lane> lanes_;
  std::size_t oversize_ = 0;
};

}  // namespace langclust
