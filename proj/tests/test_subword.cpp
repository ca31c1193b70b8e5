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


#include <map>
#include <string>
#include <vector>

#include "doctest.h"
#include "langclust/error.hpp"
#include "langclust/rng.hpp"
#include "langclust/subword.hpp"
#include "langclust/synth.hpp"
#include "support/errors.hpp"
#include "support/files.hpp"
#include "support/oracles.hpp"

using namespace langclust;
using oracle::thrown_kind;

namespace {

const std::map<std::string, std::uint64_t> kToyCounts{
    {"low", 5}, {"lower", 2}, {"newest", 6}, {"widest", 3}};

std::vector<std::vector<std::string>> toy_corpus() {
  std::vector<std::string> lines;
  for (const auto& [w, c] : kToyCounts) {
    for (std::uint64_t i = 0; i < c; ++i) lines.push_back(w);
  }
  return {lines};
}

std::vector<std::vector<std::string>> synthetic_corpora() {
  SynthConfig cfg;
  cfg.sentences = 400;
  const auto h = build_synthetic_harness(cfg);
  std::vector<std::vector<std::string>> out{h.pivot};
  for (const auto& l : h.languages) out.push_back(l.sentences);
  return out;
}

std::string random_word(Rng& rng) {
  static const std::vector<std::string> alphabet{"a", "b", "d", "e", "k", "l", "o", "r",
                                                 "s", "t", "w", "Q", "\xc3\xa9", "\xe4\xb8\xad"};
  std::string w;
  const auto len = 1 + rng.below(12);
  for (std::uint64_t i = 0; i < len; ++i) w += alphabet[rng.below(alphabet.size())];
  return w;
}

}  // namespace

TEST_SUITE("learn_bpe") {
  TEST_CASE("first merge is the most frequent pooled pair") {
    const auto naive = oracle::naive_bpe(kToyCounts, 1);
    REQUIRE(naive.size() == 1);
    // (e, s) and (s, t</w>) both occur 9 times; the lexicographic tie-break picks (e, s).
    CHECK(naive.front() == std::make_pair(std::string("e"), std::string("s")));
    const auto table = learn_bpe(toy_corpus(), 1);
    REQUIRE(table.size() == 1);
    CHECK(table.merges.front() == naive.front());
  }

  TEST_CASE("every merge matches an exhaustive recount") {
    for (std::size_t m : {1, 3, 10, 40}) {
      CHECK(learn_bpe(toy_corpus(), m).merges == oracle::naive_bpe(kToyCounts, m));
    }
    const auto synth = synthetic_corpora();
    std::map<std::string, std::uint64_t> counts;
    for (const auto& corpus : synth) {
      for (const auto& line : corpus) {
        for (const auto& w : split_whitespace(line)) ++counts[w];
      }
    }
    CHECK(learn_bpe(synth, 150).merges == oracle::naive_bpe(counts, 150));
  }

  TEST_CASE("a single one-character word allows no merges") {
    CHECK(learn_bpe({{"a a a", "a"}}, 10).empty());
  }

  TEST_CASE("stops when no pair is left") {
    const auto table = learn_bpe(toy_corpus(), 1000);
    CHECK(table.size() < 1000);
    for (const auto& [w, c] : kToyCounts) CHECK(apply_bpe(w, table).size() == 1);
  }

  TEST_CASE("merges are unique") {
    const auto table = learn_bpe(synthetic_corpora(), 300);
    std::set<std::pair<std::string, std::string>> seen(table.merges.begin(), table.merges.end());
    CHECK(seen.size() == table.size());
  }

  TEST_CASE("separate corpora pool like their concatenation") {
    const auto synth = synthetic_corpora();
    std::vector<std::string> joined;
    for (const auto& c : synth) joined.insert(joined.end(), c.begin(), c.end());
    CHECK(learn_bpe(synth, 120) == learn_bpe({joined}, 120));
  }

  TEST_CASE("line order does not matter") {
    auto synth = synthetic_corpora();
    const auto before = learn_bpe(synth, 80);
    Rng rng(4);
    for (auto& c : synth) rng.shuffle(c);
    rng.shuffle(synth);
    CHECK(learn_bpe(synth, 80) == before);
  }

  TEST_CASE("smaller tables are prefixes of larger ones") {
    const auto synth = synthetic_corpora();
    const auto big = learn_bpe(synth, 200);
    for (std::size_t m : {10, 50, 120}) {
      const auto small = learn_bpe(synth, m);
      REQUIRE(small.size() == m);
      CHECK(std::equal(small.merges.begin(), small.merges.end(), big.merges.begin()));
    }
  }

  TEST_CASE("empty corpus is an input error") {
    CHECK(thrown_kind([] { learn_bpe({}, 5); }) == ErrorKind::kInput);
    CHECK(thrown_kind([] { learn_bpe({{"   ", ""}}, 5); }) == ErrorKind::kInput);
  }
}

TEST_SUITE("apply_bpe") {
  TEST_CASE("single character is itself") {
    const auto table = learn_bpe(toy_corpus(), 10);
    const auto s = apply_bpe("x", table);
    CHECK(s == std::vector<std::string>{"x</w>"});
    CHECK(desegment(s) == "x");
  }

  TEST_CASE("training words segment as a manual replay does") {
    const auto table = learn_bpe(toy_corpus(), 6);
    for (const auto& [w, c] : kToyCounts) {
      CHECK(apply_bpe(w, table) == oracle::replay_merges(w, table.merges));
    }
    // Frozen from the replay oracle: the first six merges are
    // (e,s) (es,t</w>) (l,o) (e,w) (ew,est</w>) (n,ewest</w>).
    CHECK(apply_bpe("newest", table) == std::vector<std::string>{"newest</w>"});
    CHECK(apply_bpe("lower", table) == std::vector<std::string>{"lo", "w", "e", "r</w>"});
    CHECK(apply_bpe("widest", table) == std::vector<std::string>{"w", "i", "d", "est</w>"});
  }

  TEST_CASE("round trip and codec agreement on random words") {
    const auto table = learn_bpe(toy_corpus(), 30);
    const BpeCodec codec(table);
    Rng rng(17);
    for (int i = 0; i < 1000; ++i) {
      const auto w = random_word(rng);
      const auto s = apply_bpe(w, table);
      CHECK(desegment(s) == w);
      CHECK(codec.segment_word(w) == s);
    }
  }

  TEST_CASE("sentences round trip on the synthetic corpus") {
    const auto synth = synthetic_corpora();
    const BpeCodec codec(learn_bpe(synth, 200));
    for (const auto& corpus : synth) {
      for (const auto& line : corpus) {
        const auto s = codec.segment_line(line);
        CHECK(desegment(s) == line);
        std::vector<std::string> slow;
        for (const auto& w : split_whitespace(line)) {
          const auto ws = apply_bpe(w, codec.table());
          slow.insert(slow.end(), ws.begin(), ws.end());
        }
        CHECK(s == slow);
      }
    }
  }

  TEST_CASE("desegmenting nothing gives the empty string") {
    CHECK(desegment(std::vector<std::string>{}).empty());
  }

  TEST_CASE("multi-byte characters stay whole") {
    CHECK(utf8_chars("a\xc3\xa9\xe4\xb8\xad") == std::vector<std::string>{"a", "\xc3\xa9", "\xe4\xb8\xad"});
  }
}

TEST_SUITE("merge files") {
  TEST_CASE("save and load round trip") {
    oracle::TempDir dir("merges");
    const auto table = learn_bpe(synthetic_corpora(), 60);
    save_merges(table, dir.file("bpe.merges"));
    CHECK(load_merges(dir.file("bpe.merges")) == table);
    const auto text = oracle::read_text(dir.file("bpe.merges"));
    CHECK(text.rfind(table.merges[0].first + " " + table.merges[0].second + "\n", 0) == 0);
  }

  TEST_CASE("malformed and missing files are reported") {
    oracle::TempDir dir("merges_bad");
    oracle::write_text(dir.file("bad"), "a b\nnospace\n");
    CHECK(thrown_kind([&] { load_merges(dir.file("bad")); }) == ErrorKind::kParse);
    CHECK(thrown_kind([&] { load_merges(dir.file("absent")); }) == ErrorKind::kIo);
  }
}

TEST_SUITE("vocabulary") {
  TEST_CASE("reserved ids come first, then tags, then symbols") {
    const BpeCodec codec(learn_bpe(toy_corpus(), 5));
    const std::vector<std::string> codes{"fr", "de"};
    const auto v = Vocabulary::build(codec, toy_corpus(), codes);
    CHECK(v.symbol(Vocabulary::kPad) == "<pad>");
    CHECK(v.symbol(Vocabulary::kBos) == "<s>");
    CHECK(v.symbol(Vocabulary::kEos) == "</s>");
    CHECK(v.symbol(Vocabulary::kUnk) == "<unk>");
    CHECK(v.num_reserved() == 6);
    CHECK(v.id(Vocabulary::lang_tag("de")) == 4);
    CHECK(v.id(Vocabulary::lang_tag("fr")) == 5);
    for (TokenId i = 0; i < v.size(); ++i) CHECK(v.id(v.symbol(i)) == i);
  }

  TEST_CASE("encode and decode round trip, unknown symbols map to UNK") {
    const auto synth = synthetic_corpora();
    const BpeCodec codec(learn_bpe(synth, 100));
    const auto v = Vocabulary::build(codec, synth, std::vector<std::string>{"a1"});
    for (std::size_t i = 0; i < 50; ++i) {
      const auto ids = v.encode(synth[1][i], codec);
      CHECK(v.decode(ids) == synth[1][i]);
    }
    CHECK(v.id("never-seen") == Vocabulary::kUnk);
    CHECK(thrown_kind([&] { v.symbol(v.size()); }) == ErrorKind::kIndex);
  }

  TEST_CASE("save and load round trip") {
    oracle::TempDir dir("vocab");
    const BpeCodec codec(learn_bpe(toy_corpus(), 8));
    const auto v = Vocabulary::build(codec, toy_corpus(), std::vector<std::string>{"xx"});
    v.save(dir.file("vocab.tsv"));
    CHECK(Vocabulary::load(dir.file("vocab.tsv")) == v);
    oracle::write_text(dir.file("dup.tsv"), "<pad>\t0\n<s>\t1\n</s>\t2\n<unk>\t3\na\t4\na\t5\n");
    CHECK(thrown_kind([&] { Vocabulary::load(dir.file("dup.tsv")); }) == ErrorKind::kParse);
  }
}
