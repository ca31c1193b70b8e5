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


#include "langclust/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "langclust/error.hpp"
#include "langclust/rng.hpp"

namespace langclust {
namespace {

enum WordClass { kDet, kAdj, kNoun, kVerb, kPrep, kAdv, kNumClasses };

constexpr std::size_t kClassSize[kNumClasses] = {6, 40, 70, 50, 12, 22};
// Suffix tokens of the split-morphology family; empty = word left whole.
const char* const kSuffix[kNumClasses] = {"", "+lo", "+ka", "+ti", "", "+ne"};

// Consonant sets keep the three inventories disjoint.
constexpr const char* kPivotConsonants = "bdfmn";
constexpr const char* kSharedConsonants = "klprst";
constexpr const char* kReversedConsonants = "ghjvwz";
constexpr const char* kVowels = "aeiou";

std::vector<std::string> make_words(Rng& rng, std::string_view consonants, std::size_t count,
                                    std::set<std::string>& taken) {
  const std::string_view vowels = kVowels;
  std::vector<std::string> words;
  while (words.size() < count) {
    const std::size_t syllables = 2 + rng.below(2);
    std::string w;
    for (std::size_t s = 0; s < syllables; ++s) {
      w += consonants[rng.below(consonants.size())];
      w += vowels[rng.below(vowels.size())];
    }
    if (taken.insert(w).second) words.push_back(std::move(w));
  }
  return words;
}

struct Pivot {
  std::vector<std::string> words;     // global word id -> surface
  std::vector<WordClass> word_class;  // global word id -> class
  std::vector<std::vector<std::size_t>> by_class;
};

void noun_phrase(Rng& rng, const Pivot& p, bool allow_pp, std::vector<std::size_t>& out) {
  auto pick = [&](WordClass c) { out.push_back(p.by_class[c][rng.below(p.by_class[c].size())]); };
  pick(kDet);
  const double u = rng.uniform();
  const std::size_t adjectives = u < 0.5 ? 0 : (u < 0.85 ? 1 : 2);
  for (std::size_t i = 0; i < adjectives; ++i) pick(kAdj);
  pick(kNoun);
  if (allow_pp && rng.uniform() < 0.3) {
    pick(kPrep);
    pick(kDet);
    pick(kNoun);
  }
}

std::vector<std::size_t> pivot_sentence(Rng& rng, const Pivot& p) {
  std::vector<std::size_t> s;
  noun_phrase(rng, p, true, s);
  s.push_back(p.by_class[kVerb][rng.below(p.by_class[kVerb].size())]);
  if (rng.uniform() < 0.7) noun_phrase(rng, p, true, s);
  if (rng.uniform() < 0.4) s.push_back(p.by_class[kAdv][rng.below(p.by_class[kAdv].size())]);
  return s;
}

// Two dialect mappings (pivot word id -> surface) over one inventory: a
// random permutation for the first dialect, and the same permutation with a
// (1 - shared) fraction of words replaced by dialect-only words for the second.
std::pair<std::vector<std::string>, std::vector<std::string>> dialect_pair(
    Rng& rng, const std::vector<std::string>& inventory, std::string_view consonants,
    double shared, std::set<std::string>& taken) {
  const std::size_t n = inventory.size();
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  rng.shuffle(perm);
  std::vector<std::string> first(n), second(n);
  for (std::size_t w = 0; w < n; ++w) first[w] = second[w] = inventory[perm[w]];
  const auto replaced = static_cast<std::size_t>(std::floor((1.0 - shared) * static_cast<double>(n)));
  std::vector<std::size_t> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = i;
  rng.shuffle(ids);
  const auto fresh = make_words(rng, consonants, replaced, taken);
  for (std::size_t i = 0; i < replaced; ++i) second[ids[i]] = fresh[i];
  return {first, second};
}

std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

}  // namespace

std::vector<std::string> SynthHarness::codes() const {
  std::vector<std::string> out;
  for (const auto& l : languages) out.push_back(l.code);
  return out;
}

SynthHarness build_synthetic_harness(const SynthConfig& config) {
  if (config.min_len < 3 || config.min_len > config.max_len) {
    fail(ErrorKind::kInput, "synth: sentence lengths need 3 <= min_len <= max_len");
  }
  if (!(config.shared_fraction > 0.0 && config.shared_fraction <= 1.0)) {
    fail(ErrorKind::kInput, "synth: shared_fraction must lie in (0, 1]");
  }
  if (!(config.train_fraction > 0.0 && config.dev_fraction >= 0.0 &&
        config.train_fraction + config.dev_fraction < 1.0)) {
    fail(ErrorKind::kInput, "synth: split fractions must leave room for a test split");
  }
  Rng rng(derive_seed(config.seed, "synth"));
  std::set<std::string> taken;

  Pivot pivot;
  pivot.by_class.resize(kNumClasses);
  for (int c = 0; c < kNumClasses; ++c) {
    for (auto& w : make_words(rng, kPivotConsonants, kClassSize[c], taken)) {
      pivot.by_class[c].push_back(pivot.words.size());
      pivot.words.push_back(std::move(w));
      pivot.word_class.push_back(static_cast<WordClass>(c));
    }
  }
  const std::size_t vocab = pivot.words.size();

  // Enough distinct sentences exist for any sensible request; the cap guards
  // against a configuration that cannot be met.
  std::vector<std::vector<std::size_t>> sentences;
  std::set<std::vector<std::size_t>> seen;
  for (std::size_t attempts = 0; sentences.size() < config.sentences; ++attempts) {
    if (attempts > 100 * config.sentences + 1000) {
      fail(ErrorKind::kInput, "synth: cannot generate enough distinct sentences");
    }
    auto s = pivot_sentence(rng, pivot);
    if (s.size() < config.min_len || s.size() > config.max_len) continue;
    if (seen.insert(s).second) sentences.push_back(std::move(s));
  }

  const auto shared_inventory = make_words(rng, kSharedConsonants, vocab, taken);
  const auto reversed_inventory = make_words(rng, kReversedConsonants, vocab, taken);
  auto [a1, a2] = dialect_pair(rng, shared_inventory, kSharedConsonants, config.shared_fraction, taken);
  auto [b1, b2] = dialect_pair(rng, reversed_inventory, kReversedConsonants, config.shared_fraction, taken);
  auto [c1, c2] = dialect_pair(rng, shared_inventory, kSharedConsonants, config.shared_fraction, taken);

  SynthHarness h;
  for (const auto& s : sentences) {
    std::vector<std::string> words;
    for (auto w : s) words.push_back(pivot.words[w]);
    h.pivot.push_back(join(words));
  }
  auto relexify = [&](const std::string& code, const std::string& family,
                      const std::vector<std::string>& map, bool reverse, bool split) {
    SynthLanguage lang{code, family, {}};
    for (const auto& s : sentences) {
      std::vector<std::string> tokens;
      for (auto w : s) {
        tokens.push_back(map[w]);
        const char* suffix = kSuffix[pivot.word_class[w]];
        if (split && *suffix != '\0') tokens.emplace_back(suffix);
      }
      if (reverse) std::reverse(tokens.begin(), tokens.end());
      lang.sentences.push_back(join(tokens));
    }
    h.languages.push_back(std::move(lang));
  };
  relexify("a1", "family_a", a1, false, false);
  relexify("a2", "family_a", a2, false, false);
  relexify("b1", "family_b", b1, true, false);
  relexify("b2", "family_b", b2, true, false);
  relexify("c1", "family_c", c1, false, true);
  relexify("c2", "family_c", c2, false, true);

  std::vector<std::size_t> order(sentences.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng split_rng(derive_seed(config.seed, "synth:split"));
  split_rng.shuffle(order);
  const auto n = static_cast<double>(order.size());
  const auto n_train = static_cast<std::size_t>(std::llround(config.train_fraction * n));
  const auto n_dev = static_cast<std::size_t>(std::llround(config.dev_fraction * n));
  h.train.assign(order.begin(), order.begin() + static_cast<long>(n_train));
  h.dev.assign(order.begin() + static_cast<long>(n_train),
               order.begin() + static_cast<long>(n_train + n_dev));
  h.test.assign(order.begin() + static_cast<long>(n_train + n_dev), order.end());

  std::map<std::string, std::string> families;
  for (const auto& l : h.languages) families[l.code] = l.family;
  h.taxonomy = TaxonomyTable(families);
  h.planted = cluster_by_family(h.codes(), h.taxonomy);
  return h;
}

SynthFiles write_synthetic_harness(const SynthHarness& harness, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto write_split = [&](const std::string& split, const std::vector<std::size_t>& indices) {
    std::vector<ManifestEntry> entries;
    for (const auto& lang : harness.languages) {
      const std::string name = lang.code + "." + split + ".tsv";
      std::ofstream out(fs::path(dir) / name, std::ios::binary);
      if (!out) fail(ErrorKind::kIo, "cannot write " + (fs::path(dir) / name).string());
      for (auto i : indices) out << lang.sentences[i] << '\t' << harness.pivot[i] << '\n';
      entries.push_back({lang.code, name, Direction::kToPivot});
    }
    const auto manifest = (fs::path(dir) / ("manifest." + split + ".tsv")).string();
    save_manifest(entries, manifest);
    return manifest;
  };
  SynthFiles files;
  files.train_manifest = write_split("train", harness.train);
  files.dev_manifest = write_split("dev", harness.dev);
  files.test_manifest = write_split("test", harness.test);
  files.taxonomy = (fs::path(dir) / "taxonomy.tsv").string();
  harness.taxonomy.save(files.taxonomy);
  files.planted = (fs::path(dir) / "planted.json").string();
  std::ofstream planted(files.planted, std::ios::binary);
  if (!planted) fail(ErrorKind::kIo, "cannot write " + files.planted);
  ClusterAssignment p = harness.planted;
  planted << assignment_to_json(p) << '\n';
  return files;
}

std::vector<std::string> vocabulary_types(const SynthLanguage& language) {
  std::set<std::string> types;
  for (const auto& s : language.sentences) {
    for (auto& t : split_whitespace(s)) types.insert(std::move(t));
  }
  return {types.begin(), types.end()};
}

}  // namespace langclust
