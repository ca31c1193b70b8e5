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

#include "langclust/data.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "langclust/error.hpp"
#include "langclust/log.hpp"

namespace langclust {

const char* to_string(Direction d) {
  return d == Direction::kToPivot ? "to_pivot" : "from_pivot";
}

Direction parse_direction(std::string_view text) {
  if (text == "to_pivot") return Direction::kToPivot;
  if (text == "from_pivot") return Direction::kFromPivot;
  fail(ErrorKind::kInput, "unknown direction '" + std::string(text) + "'");
}

std::vector<ManifestEntry> load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot read manifest " + path);
  const auto base = std::filesystem::path(path).parent_path();
  std::vector<ManifestEntry> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string::npos) {
      fail(ErrorKind::kParse, path + ":" + std::to_string(lineno) +
                                  ": expected lang_code<TAB>path<TAB>direction");
    }
    ManifestEntry e;
    e.lang_code = line.substr(0, t1);
    std::filesystem::path p = line.substr(t1 + 1, t2 - t1 - 1);
    e.path = (p.is_absolute() ? p : base / p).string();
    e.direction = parse_direction(line.substr(t2 + 1));
    entries.push_back(std::move(e));
  }
  return entries;
}

void save_manifest(const std::vector<ManifestEntry>& entries, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path);
  for (const auto& e : entries) {
    out << e.lang_code << '\t' << e.path << '\t' << to_string(e.direction) << '\n';
  }
}

std::vector<std::pair<std::string, std::string>> read_parallel_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot read corpus " + path);
  std::vector<std::pair<std::string, std::string>> lines;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      fail(ErrorKind::kParse, path + ":" + std::to_string(lineno) + ": missing tab separator");
    }
    lines.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  return lines;
}

ParallelCorpus load_corpus(const std::string& path, const std::string& lang_code,
                           Direction direction, const BpeCodec& codec, const Vocabulary& vocab) {
  ParallelCorpus corpus{lang_code, direction, {}};
  const auto lines = read_parallel_text(path);
  std::size_t lineno = 0;
  for (const auto& [src, tgt] : lines) {
    ++lineno;
    SentencePair pair{vocab.encode(src, codec), vocab.encode(tgt, codec)};
    if (pair.src.empty() || pair.tgt.empty()) {
      fail(ErrorKind::kParse, path + ":" + std::to_string(lineno) + ": empty sentence");
    }
    corpus.pairs.push_back(std::move(pair));
  }
  if (corpus.pairs.empty()) {
    log_warning("corpus " + path + " (" + lang_code + ") is empty");
  } else {
    log_info("loaded " + std::to_string(corpus.pairs.size()) + " pairs for " + lang_code);
  }
  return corpus;
}

ParallelCorpus subsample(const ParallelCorpus& corpus, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    fail(ErrorKind::kInput, "data fraction must lie in (0, 1]");
  }
  if (fraction == 1.0 || corpus.pairs.empty()) return corpus;
  const auto keep = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(fraction * static_cast<double>(corpus.size()))));
  std::vector<std::size_t> order(corpus.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(derive_seed(seed, "subsample:" + corpus.lang_code));
  rng.shuffle(order);
  order.resize(keep);
  std::sort(order.begin(), order.end());
  ParallelCorpus out{corpus.lang_code, corpus.direction, {}};
  for (auto i : order) out.pairs.push_back(corpus.pairs[i]);
  return out;
}

std::vector<ParallelCorpus> upsample(std::vector<ParallelCorpus> corpora, std::uint64_t seed) {
  std::size_t target = 0;
  for (const auto& c : corpora) target = std::max(target, c.size());
  for (auto& c : corpora) {
    if (c.size() == target || c.pairs.empty()) continue;
    Rng rng(derive_seed(seed, "upsample:" + c.lang_code));
    const std::size_t original = c.size();
    c.pairs.reserve(target);
    while (c.size() < target) c.pairs.push_back(c.pairs[rng.below(original)]);
  }
  return corpora;
}

std::size_t MultilingualBatch::source_tokens() const {
  std::size_t n = 0;
  for (const auto& g : groups) n += g.source_tokens;
  return n;
}

BatchStream::BatchStream(const std::vector<ParallelCorpus>& corpora, std::size_t tokens_per_lang,
                         std::uint64_t seed)
    : corpora_(corpora), budget_(tokens_per_lang) {
  if (budget_ == 0) fail(ErrorKind::kInput, "tokens_per_lang must be positive");
  if (corpora_.empty()) fail(ErrorKind::kInput, "batch stream needs at least one corpus");
  for (std::size_t i = 0; i < corpora_.size(); ++i) {
    if (corpora_[i].pairs.empty()) {
      fail(ErrorKind::kInput, "corpus for " + corpora_[i].lang_code + " is empty");
    }
    lanes_.push_back(Lane{Rng(derive_seed(seed, "batches:" + corpora_[i].lang_code + ":" +
                                                    std::to_string(i))),
                          {}, 0});
  }
}

std::vector<LanguageGroup> BatchStream::plan_epoch(std::size_t corpus, Rng& rng) {
  const auto& pairs = corpora_.at(corpus).pairs;
  std::vector<std::size_t> order(pairs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);
  std::vector<LanguageGroup> groups;
  LanguageGroup current{corpus, {}, 0};
  for (std::size_t idx : order) {
    const std::size_t len = pairs[idx].src.size();
    if (!current.pairs.empty() && current.source_tokens + len > budget_) {
      groups.push_back(std::move(current));
      current = LanguageGroup{corpus, {}, 0};
    }
    current.pairs.push_back(idx);
    current.source_tokens += len;
    if (current.pairs.size() == 1 && len > budget_) {
      ++oversize_;
      log_warning("sentence of " + std::to_string(len) + " tokens exceeds the per-language budget of " +
                  std::to_string(budget_) + "; emitted as its own group");
      groups.push_back(std::move(current));
      current = LanguageGroup{corpus, {}, 0};
    }
  }
  if (!current.pairs.empty()) {
    // A short tail is folded into the previous group (which stays below 1.5x budget).
    if (2 * current.source_tokens < budget_ && !groups.empty() &&
        groups.back().source_tokens <= budget_) {
      auto& prev = groups.back();
      prev.pairs.insert(prev.pairs.end(), current.pairs.begin(), current.pairs.end());
      prev.source_tokens += current.source_tokens;
    } else {
      groups.push_back(std::move(current));
    }
  }
  return groups;
}

MultilingualBatch BatchStream::next() {
  MultilingualBatch batch;
  for (std::size_t i = 0; i < lanes_.size(); ++i) {
    auto& lane = lanes_[i];
    if (lane.pending.empty()) {
      auto groups = plan_epoch(i, lane.rng);
      lane.pending.assign(std::make_move_iterator(groups.begin()),
                          std::make_move_iterator(groups.end()));
      ++lane.epoch;
    }
    batch.groups.push_back(std::move(lane.pending.front()));
    lane.pending.pop_front();
  }
  return batch;
}

std::vector<Example> BatchStream::examples(const MultilingualBatch& batch,
                                           const std::vector<std::size_t>& lang_ids) const {
  std::vector<Example> out;
  for (const auto& g : batch.groups) {
    for (std::size_t idx : g.pairs) {
      const auto& p = corpora_[g.corpus].pairs[idx];
      out.push_back(Example{lang_ids.at(g.corpus), p.src, p.tgt});
    }
  }
  return out;
}

}  // namespace langclust
