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

#include "langclust/subword.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>

#include "langclust/error.hpp"

namespace langclust {
namespace {

std::string pair_key(std::string_view left, std::string_view right) {
  std::string key;
  key.reserve(left.size() + right.size() + 1);
  key.append(left);
  key.push_back('\x1f');
  key.append(right);
  return key;
}

std::vector<std::string> initial_symbols(std::string_view word) {
  auto symbols = utf8_chars(word);
  if (!symbols.empty()) symbols.back().append(kEndOfWord);
  return symbols;
}

void merge_in_place(std::vector<std::string>& symbols, const std::string& left,
                    const std::string& right) {
  if (symbols.size() < 2) return;
  std::vector<std::string> out;
  out.reserve(symbols.size());
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (i + 1 < symbols.size() && symbols[i] == left && symbols[i + 1] == right) {
      out.push_back(left + right);
      ++i;
    } else {
      out.push_back(std::move(symbols[i]));
    }
  }
  symbols = std::move(out);
}

bool ends_with_marker(std::string_view s) {
  return s.size() >= kEndOfWord.size() &&
         s.substr(s.size() - kEndOfWord.size()) == kEndOfWord;
}

}  // namespace

std::vector<std::string> utf8_chars(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto lead = static_cast<unsigned char>(text[i]);
    std::size_t len = 1;
    if (lead >= 0xF0) {
      len = 4;
    } else if (lead >= 0xE0) {
      len = 3;
    } else if (lead >= 0xC0) {
      len = 2;
    }
    len = std::min(len, text.size() - i);
    out.emplace_back(text.substr(i, len));
    i += len;
  }
  return out;
}

std::vector<std::string> split_whitespace(std::string_view line) {
  std::vector<std::string> words;
  std::size_t i = 0;
  auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
  };
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    std::size_t j = i;
    while (j < line.size() && !is_space(line[j])) ++j;
    if (j > i) words.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return words;
}

MergeTable learn_bpe(const std::vector<std::vector<std::string>>& corpora,
                     std::size_t num_merges) {
  std::map<std::string, std::uint64_t> counts;
  for (const auto& corpus : corpora) {
    for (const auto& line : corpus) {
      for (auto& w : split_whitespace(line)) ++counts[w];
    }
  }
  if (counts.empty()) fail(ErrorKind::kInput, "learn_bpe: corpus contains no words");
  return learn_bpe_from_counts(counts, num_merges);
}

MergeTable learn_bpe_from_counts(const std::map<std::string, std::uint64_t>& word_counts,
                                 std::size_t num_merges) {
  if (word_counts.empty()) fail(ErrorKind::kInput, "learn_bpe: corpus contains no words");
  struct Word {
    std::vector<std::string> symbols;
    std::uint64_t count;
  };
  std::vector<Word> words;
  words.reserve(word_counts.size());
  for (const auto& [w, c] : word_counts) words.push_back({initial_symbols(w), c});

  // Pair counts are maintained incrementally: only words containing the
  // chosen pair are touched after each merge.
  std::map<std::pair<std::string, std::string>, std::uint64_t> pair_counts;
  std::map<std::pair<std::string, std::string>, std::set<std::size_t>> where;
  auto add_word = [&](std::size_t wi, int sign) {
    const auto& s = words[wi].symbols;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
      auto key = std::make_pair(s[i], s[i + 1]);
      if (sign > 0) {
        pair_counts[key] += words[wi].count;
        where[key].insert(wi);
      } else {
        auto it = pair_counts.find(key);
        it->second -= words[wi].count;
        if (it->second == 0) pair_counts.erase(it);
        auto wit = where.find(key);
        if (wit != where.end()) {
          wit->second.erase(wi);
          if (wit->second.empty()) where.erase(wit);
        }
      }
    }
  };
  for (std::size_t wi = 0; wi < words.size(); ++wi) add_word(wi, +1);

  MergeTable table;
  while (table.merges.size() < num_merges && !pair_counts.empty()) {
    // std::map iterates keys in lexicographic order, so the first maximum wins ties.
    auto best = pair_counts.begin();
    for (auto it = pair_counts.begin(); it != pair_counts.end(); ++it) {
      if (it->second > best->second) best = it;
    }
    const auto chosen = best->first;
    table.merges.push_back(chosen);
    const std::vector<std::size_t> affected(where[chosen].begin(), where[chosen].end());
    for (std::size_t wi : affected) {
      add_word(wi, -1);
      merge_in_place(words[wi].symbols, chosen.first, chosen.second);
      add_word(wi, +1);
    }
  }
  return table;
}

std::vector<std::string> apply_bpe(std::string_view word, const MergeTable& merges) {
  auto symbols = initial_symbols(word);
  for (const auto& [left, right] : merges.merges) {
    if (symbols.size() < 2) break;
    merge_in_place(symbols, left, right);
  }
  return symbols;
}

std::string desegment(std::span<const std::string> symbols) {
  std::string out;
  bool at_word_start = true;
  for (const auto& s : symbols) {
    if (at_word_start && !out.empty()) out.push_back(' ');
    if (ends_with_marker(s)) {
      out.append(s, 0, s.size() - kEndOfWord.size());
      at_word_start = true;
    } else {
      out.append(s);
      at_word_start = false;
    }
  }
  return out;
}

void save_merges(const MergeTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path);
  for (const auto& [l, r] : table.merges) out << l << ' ' << r << '\n';
}

MergeTable load_merges(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot read " + path);
  MergeTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto sp = line.find(' ');
    if (sp == std::string::npos || sp == 0 || sp + 1 >= line.size() ||
        line.find(' ', sp + 1) != std::string::npos) {
      fail(ErrorKind::kParse, path + ":" + std::to_string(lineno) +
                                  ": expected 'left right'");
    }
    table.merges.emplace_back(line.substr(0, sp), line.substr(sp + 1));
  }
  return table;
}

BpeCodec::BpeCodec(MergeTable table) : table_(std::move(table)) {
  for (std::size_t r = 0; r < table_.merges.size(); ++r) {
    rank_.emplace(pair_key(table_.merges[r].first, table_.merges[r].second), r);
  }
}

std::vector<std::string> BpeCodec::segment_word(std::string_view word) const {
  auto symbols = initial_symbols(word);
  // Replaying in learned order means the next merge to fire is always the
  // lowest-ranked pair above the last one applied.
  std::size_t floor = 0;
  bool first = true;
  while (symbols.size() > 1) {
    std::size_t best = std::numeric_limits<std::size_t>::max();
    for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
      auto it = rank_.find(pair_key(symbols[i], symbols[i + 1]));
      if (it == rank_.end()) continue;
      if ((first || it->second > floor) && it->second < best) best = it->second;
    }
    if (best == std::numeric_limits<std::size_t>::max()) break;
    merge_in_place(symbols, table_.merges[best].first, table_.merges[best].second);
    floor = best;
    first = false;
  }
  return symbols;
}

std::vector<std::string> BpeCodec::segment_line(std::string_view line) const {
  std::vector<std::string> out;
  for (const auto& w : split_whitespace(line)) {
    auto s = segment_word(w);
    out.insert(out.end(), std::make_move_iterator(s.begin()),
               std::make_move_iterator(s.end()));
  }
  return out;
}

// ---------------------------------------------------------------------------

Vocabulary::Vocabulary() {
  for (const char* s : {"<pad>", "<s>", "</s>", "<unk>"}) add(s);
}

std::string Vocabulary::lang_tag(std::string_view code) {
  return "<lang:" + std::string(code) + ">";
}

Vocabulary Vocabulary::build(const BpeCodec& codec,
                             const std::vector<std::vector<std::string>>& corpora,
                             std::span<const std::string> lang_codes) {
  Vocabulary v;
  std::vector<std::string> codes(lang_codes.begin(), lang_codes.end());
  std::sort(codes.begin(), codes.end());
  codes.erase(std::unique(codes.begin(), codes.end()), codes.end());
  for (const auto& c : codes) v.add(lang_tag(c));
  v.num_reserved_ = v.size();
  std::set<std::string> symbols;
  for (const auto& corpus : corpora) {
    for (const auto& line : corpus) {
      for (auto& s : codec.segment_line(line)) symbols.insert(std::move(s));
    }
  }
  for (const auto& s : symbols) v.add(s);
  return v;
}

TokenId Vocabulary::add(const std::string& symbol) {
  auto it = index_.find(symbol);
  if (it != index_.end()) return it->second;
  const TokenId id = symbols_.size();
  symbols_.push_back(symbol);
  index_.emplace(symbol, id);
  return id;
}

TokenId Vocabulary::id(std::string_view symbol) const {
  auto it = index_.find(std::string(symbol));
  return it == index_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view symbol) const {
  return index_.count(std::string(symbol)) > 0;
}

const std::string& Vocabulary::symbol(TokenId id) const {
  if (id >= symbols_.size()) {
    fail(ErrorKind::kIndex, "token id " + std::to_string(id) + " outside vocabulary");
  }
  return symbols_[id];
}

std::vector<TokenId> Vocabulary::encode(std::string_view line, const BpeCodec& codec) const {
  std::vector<TokenId> ids;
  for (const auto& s : codec.segment_line(line)) ids.push_back(id(s));
  return ids;
}

std::string Vocabulary::decode(std::span<const TokenId> ids) const {
  std::vector<std::string> symbols;
  for (TokenId t : ids) {
    if (t == kPad || t == kBos || t == kEos) continue;
    symbols.push_back(symbol(t));
  }
  return desegment(symbols);
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path);
  for (std::size_t i = 0; i < symbols_.size(); ++i) out << symbols_[i] << '\t' << i << '\n';
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot read " + path);
  Vocabulary v;
  v.symbols_.clear();
  v.index_.clear();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos) {
      fail(ErrorKind::kParse, path + ":" + std::to_string(lineno) + ": missing tab");
    }
    std::size_t id = 0;
    try {
      id = std::stoul(line.substr(tab + 1));
    } catch (const std::exception&) {
      fail(ErrorKind::kParse, path + ":" + std::to_string(lineno) + ": bad id");
    }
    if (id != v.symbols_.size()) {
      fail(ErrorKind::kParse, path + ":" + std::to_string(lineno) +
                                  ": ids must be dense and ordered");
    }
    const std::string sym = line.substr(0, tab);
    if (v.index_.count(sym)) {
      fail(ErrorKind::kParse, path + ":" + std::to_string(lineno) + ": duplicate symbol");
    }
    v.add(sym);
  }
  if (v.size() < kNumSpecial || v.symbols_[0] != "<pad>" || v.symbols_[1] != "<s>" ||
      v.symbols_[2] != "</s>" || v.symbols_[3] != "<unk>") {
    fail(ErrorKind::kParse, path + ": reserved symbols missing");
  }
  v.num_reserved_ = kNumSpecial;
  while (v.num_reserved_ < v.size() && v.symbols_[v.num_reserved_].rfind("<lang:", 0) == 0) {
    ++v.num_reserved_;
  }
  return v;
}

}  // namespace langclust
