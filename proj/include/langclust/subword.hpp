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
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace langclust {

using TokenId = std::size_t;

/// Suffix marking a word-final symbol.
inline constexpr std::string_view kEndOfWord = "</w>";

struct MergeTable {
  std::vector<std::pair<std::string, std::string>> merges;

  std::size_t size() const noexcept { return merges.size(); }
  bool empty() const noexcept { return merges.empty(); }
  friend bool operator==(const MergeTable&, const MergeTable&) = default;
};

/// Splits a UTF-8 string into code points.
std::vector<std::string> utf8_chars(std::string_view text);
std::vector<std::string> split_whitespace(std::string_view line);

/// Joint BPE over pooled word frequencies of all corpora. Each corpus is a
/// list of whitespace-tokenized lines. Equal pair counts are resolved by the
/// lexicographically smallest (left, right).
MergeTable learn_bpe(const std::vector<std::vector<std::string>>& corpora,
                     std::size_t num_merges);
MergeTable learn_bpe_from_counts(const std::map<std::string, std::uint64_t>& word_counts,
                                 std::size_t num_merges);

/// Replays the merges in learned order on one word.
std::vector<std::string> apply_bpe(std::string_view word, const MergeTable& merges);

/// Joins symbols back into space-separated words, honouring end-of-word markers.
std::string desegment(std::span<const std::string> symbols);

void save_merges(const MergeTable& table, const std::string& path);
MergeTable load_merges(const std::string& path);

/// Rank-indexed segmenter, equivalent to apply_bpe but without rescanning the
/// whole table per word.
class BpeCodec {
 public:
  BpeCodec() = default;
  explicit BpeCodec(MergeTable table);

  std::vector<std::string> segment_word(std::string_view word) const;
  std::vector<std::string> segment_line(std::string_view line) const;
  const MergeTable& table() const noexcept { return table_; }

 private:
  MergeTable table_;
  std::unordered_map<std::string, std::size_t> rank_;
};

/// Shared symbol table. Reserved ids come first: PAD, BOS, EOS, UNK, then
/// one tag per language, then subword symbols in lexicographic order.
class Vocabulary {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kBos = 1;
  static constexpr TokenId kEos = 2;
  static constexpr TokenId kUnk = 3;
  static constexpr std::size_t kNumSpecial = 4;

  Vocabulary();

  /// Registers every symbol produced by segmenting the corpora.
  static Vocabulary build(const BpeCodec& codec,
                          const std::vector<std::vector<std::string>>& corpora,
                          std::span<const std::string> lang_codes);

  TokenId add(const std::string& symbol);
  TokenId id(std::string_view symbol) const;  // kUnk when missing
  bool contains(std::string_view symbol) const;
  const std::string& symbol(TokenId id) const;
  std::size_t size() const noexcept { return symbols_.size(); }
  std::size_t num_reserved() const noexcept { return num_reserved_; }
  static std::string lang_tag(std::string_view code);

  std::vector<TokenId> encode(std::string_view line, const BpeCodec& codec) const;
  /// Drops PAD/BOS/EOS and reassembles words.
  std::string decode(std::span<const TokenId> ids) const;

  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.symbols_ == b.symbols_ && a.num_reserved_ == b.num_reserved_;
  }

 private:
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, TokenId> index_;
  std::size_t num_reserved_ = kNumSpecial;
};

}  // namespace langclust
