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


#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "langclust/embeddings.hpp"
#include "langclust/error.hpp"
#include "langclust/model.hpp"
#include "langclust/optim.hpp"
#include "langclust/rng.hpp"
#include "langclust/train.hpp"
#include "support/errors.hpp"
#include "support/files.hpp"
#include "support/gradient_cases.hpp"
#include "support/oracles.hpp"
#include "support/tag_experiment.hpp"

using namespace langclust;
using oracle::thrown_kind;

namespace {

ModelConfig small_config(std::size_t vocab) {
  ModelConfig cfg;
  cfg.vocab_size = vocab;
  cfg.max_len = 16;
  return cfg;
}

/// Hand-set next-token distributions: a deterministic function of the prefix.
StepScorer table_scorer(std::uint64_t seed, std::size_t vocab) {
  return [seed, vocab](const std::vector<std::vector<TokenId>>& prefixes) {
    std::vector<std::vector<double>> out;
    for (const auto& p : prefixes) {
      std::string key = std::to_string(seed);
      for (auto t : p) key += "," + std::to_string(t);
      Rng rng(fnv1a(key));
      std::vector<double> logits(vocab);
      double z = 0.0;
      for (auto& l : logits) z += std::exp(l = rng.uniform(-3.0, 3.0));
      for (auto& l : logits) l -= std::log(z);
      out.push_back(logits);
    }
    return out;
  };
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_SUITE("model config") {
  TEST_CASE("invalid configurations are input errors") {
    auto cfg = small_config(10);
    cfg.num_heads = 3;
    CHECK(thrown_kind([&] { cfg.validate(); }) == ErrorKind::kInput);
    cfg = small_config(10);
    cfg.lang_emb_dim = 16;
    CHECK(thrown_kind([&] { cfg.validate(); }) == ErrorKind::kInput);
    cfg = small_config(0);
    CHECK(thrown_kind([&] { cfg.validate(); }) == ErrorKind::kInput);
    cfg = small_config(10);
    cfg.dropout = 1.0;
    CHECK(thrown_kind([&] { cfg.validate(); }) == ErrorKind::kInput);
  }

  TEST_CASE("languages are registered sorted and unique") {
    TransformerModel m(small_config(10), {"fr", "de", "it"}, 1);
    CHECK(m.languages() == std::vector<std::string>{"de", "fr", "it"});
    CHECK(m.lang_index("it") == 2);
    CHECK(thrown_kind([&] { m.lang_index("es"); }) == ErrorKind::kLookup);
    CHECK(thrown_kind([] { TransformerModel(small_config(10), {"de", "de"}, 1); }) == ErrorKind::kInput);
    CHECK(m.parameter("lang_emb").shape() == Shape{3, 32});
  }
}

TEST_SUITE("encoder") {
  TEST_CASE("output shape is length by width") {
    TransformerModel m(small_config(12), {"a", "b"}, 2);
    for (std::size_t len : {1, 4, 9}) {
      const std::vector<TokenId> src(len, 5);
      CHECK(m.encode(src, 1).shape() == Shape{len, 32});
    }
  }

  TEST_CASE("the language embedding is added at every position") {
    TransformerModel m(small_config(12), {"a", "b"}, 3);
    const std::vector<TokenId> src{4, 9, 11, 6};
    ForwardTrace t0, t1;
    m.encode(src, 0, &t0);
    m.encode(src, 1, &t1);
    const auto& emb = m.parameter("lang_emb").value();
    for (std::size_t pos = 0; pos < src.size(); ++pos) {
      for (std::size_t k = 0; k < 32; ++k) {
        const double diff = t0.encoder_input[pos * 32 + k] - t1.encoder_input[pos * 32 + k];
        CHECK(std::abs(diff - (emb[k] - emb[32 + k])) <= 1e-12);
      }
    }
  }

  TEST_CASE("a zeroed language table makes the languages indistinguishable") {
    TransformerModel m(small_config(12), {"a", "b"}, 4);
    m.parameter("lang_emb").mutable_value().fill(0.0);
    const std::vector<TokenId> src{7, 5, 10};
    CHECK(m.encode(src, 0) == m.encode(src, 1));
  }

  TEST_CASE("an unregistered language id is a lookup error") {
    TransformerModel m(small_config(12), {"a"}, 5);
    const std::vector<TokenId> src{5};
    CHECK(thrown_kind([&] { m.encode(src, 1); }) == ErrorKind::kLookup);
    const std::vector<Example> batch{{3, src, src}};
    CHECK(thrown_kind([&] { m.loss(batch); }) == ErrorKind::kLookup);
  }
}

TEST_SUITE("loss") {
  TEST_CASE("an untrained model costs about ln V") {
    for (std::size_t vocab : {20, 60, 200}) {
      TransformerModel m(small_config(vocab), {"a", "b"}, vocab);
      Rng rng(vocab);
      std::vector<Example> batch;
      for (int i = 0; i < 16; ++i) {
        std::vector<TokenId> src(1 + rng.below(8)), tgt(1 + rng.below(8));
        for (auto& t : src) t = 4 + rng.below(vocab - 4);
        for (auto& t : tgt) t = 4 + rng.below(vocab - 4);
        batch.push_back({rng.below(2), src, tgt});
      }
      const double loss = m.loss(batch).value().item();
      CHECK(loss >= 0.0);
      CHECK(std::abs(loss - std::log(static_cast<double>(vocab))) <= 0.1 * std::log(static_cast<double>(vocab)));
    }
  }

  TEST_CASE("sentences beyond max_len are input errors") {
    TransformerModel m(small_config(12), {"a"}, 6);
    const std::vector<Example> long_src{{0, std::vector<TokenId>(17, 5), {5}}};
    const std::vector<Example> long_tgt{{0, {5}, std::vector<TokenId>(16, 5)}};
    const std::vector<Example> empty_src{{0, {}, {5}}};
    CHECK(thrown_kind([&] { m.loss(long_src); }) == ErrorKind::kInput);
    CHECK(thrown_kind([&] { m.loss(long_tgt); }) == ErrorKind::kInput);
    CHECK(thrown_kind([&] { m.loss(empty_src); }) == ErrorKind::kInput);
  }

  TEST_CASE("padding does not change the loss") {
    TransformerModel m(small_config(12), {"a", "b"}, 7);
    const Example shortest{0, {5, 6}, {7}};
    const Example longest{1, {8, 9, 10, 11, 4, 5}, {6, 7, 8, 9}};
    const std::vector<Example> one{shortest}, two{longest}, both{shortest, longest};
    const double l1 = m.loss(one).value().item(), l2 = m.loss(two).value().item();
    const double mixed = m.loss(both).value().item();
    // Token-weighted mean: 2 target positions for the first, 5 for the second.
    CHECK(mixed == doctest::Approx((2 * l1 + 5 * l2) / 7).epsilon(1e-12));
  }

  TEST_CASE("a single pair can be memorized") {
    TransformerModel m(oracle::toy_model_config(), {"xa"}, 8);
    const std::vector<Example> batch{{0, {5, 6, 7, 8}, {9, 10, 4}}};
    AdamState adam;
    double loss = INFINITY;
    std::size_t step = 0;
    while (step < 2000 && loss >= 0.01) {
      ++step;
      m.zero_grad();
      Var l = m.loss(batch);
      loss = l.value().item();
      backward(l);
      adam_step(m.parameters(), adam, 3e-3);
    }
    MESSAGE("memorized after ", step, " steps");
    CHECK(loss < 0.01);
  }

  TEST_CASE("decoder self-attention is causal") {
    TransformerModel m(small_config(12), {"a"}, 9);
    const std::vector<TokenId> src{5, 6, 7};
    std::vector<TokenId> tgt{Vocabulary::kBos, 8, 9, 10, 11, 4};
    const auto base = m.decoder_logits(src, 0, tgt);
    for (std::size_t t = 1; t < tgt.size(); ++t) {
      auto changed = tgt;
      changed[t] = changed[t] == 5 ? 6 : 5;
      const auto logits = m.decoder_logits(src, 0, changed);
      double before = 0.0, at = 0.0;
      for (std::size_t pos = 0; pos < tgt.size(); ++pos) {
        for (std::size_t v = 0; v < 12; ++v) {
          const double d = std::abs(logits[pos * 12 + v] - base[pos * 12 + v]);
          (pos < t ? before : at) = std::max(pos < t ? before : at, d);
        }
      }
      CHECK(before <= 1e-12);
      CHECK(at > 0.0);
    }
  }

  TEST_CASE("attention rows are stochastic") {
    TransformerModel m(small_config(12), {"a", "b"}, 10);
    const std::vector<Example> batch{{0, {5, 6, 7}, {8}}, {1, {9, 4, 5, 6, 7, 8}, {10, 11, 4, 5}}};
    ForwardTrace trace;
    m.loss(batch, nullptr, &trace);
    // Encoder self, decoder self and decoder cross attention per layer.
    REQUIRE(trace.attention.size() == 3 * m.config().num_layers);
    for (const auto& a : trace.attention) {
      const std::size_t k = a.dim(2), rows = a.size() / k;
      for (std::size_t r = 0; r < rows; ++r) {
        double total = 0.0;
        for (std::size_t j = 0; j < k; ++j) total += a[r * k + j];
        CHECK(std::abs(total - 1.0) <= 1e-6);
      }
    }
  }
}

TEST_SUITE("tag mechanism") {
  TEST_CASE("each language decodes its own target and receives gradient") {
    for (std::uint64_t seed : {1, 2, 3}) {
      const auto r = oracle::run_tag_experiment(seed);
      CHECK(r.decodes_own_targets());
      for (std::size_t l = 0; l < 2; ++l) {
        CHECK(r.min_present_grad[l] > 0.0);
        CHECK(r.max_absent_grad[l] == 0.0);
      }
    }
  }
}

TEST_SUITE("beam search") {
  TEST_CASE("length penalty") {
    CHECK(length_penalty(1, 1.1) == doctest::Approx(1.0));
    CHECK(length_penalty(7, 1.1) == doctest::Approx(std::pow(2.0, 1.1)));
    CHECK(length_penalty(13, 0.0) == 1.0);
  }

  TEST_CASE("a wide beam finds the exhaustive optimum") {
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
      const auto scorer = table_scorer(seed, 3);
      for (double alpha : {0.0, 1.1}) {
        const BeamConfig cfg{27, alpha, 3};
        const auto beam = beam_search(scorer, 0, cfg);
        const auto best = oracle::exhaustive_decode(scorer, 0, 3, alpha);
        CHECK(beam.tokens == best.tokens);
        CHECK(beam.score == doctest::Approx(best.score).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("without a length penalty the score is the log-probability") {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
      const auto h = beam_search(table_scorer(seed, 4), 0, BeamConfig{6, 0.0, 5});
      CHECK(h.score == h.log_prob);
    }
  }

  TEST_CASE("beam size one is greedy decoding") {
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
      const auto scorer = table_scorer(seed, 5);
      CHECK(beam_search(scorer, 0, BeamConfig{1, 1.1, 6}).tokens == greedy_decode(scorer, 0, 6));
    }
    TransformerModel m(small_config(12), {"a", "b"}, 11);
    const std::vector<TokenId> src{5, 7, 9};
    for (std::size_t lang : {0, 1}) {
      CHECK(beam_search(m, src, lang, BeamConfig{1, 1.1, 10}) == greedy_decode(m, src, lang, 10));
    }
  }

  TEST_CASE("decoding respects limits and is deterministic") {
    TransformerModel m(small_config(12), {"a"}, 12);
    const std::vector<TokenId> src{5, 6};
    const BeamConfig cfg{6, 1.1, 7};
    const auto out = beam_search(m, src, 0, cfg);
    CHECK(out.size() <= 7);
    for (auto t : out) CHECK(t >= Vocabulary::kNumSpecial);
    CHECK(beam_search(m, src, 0, cfg) == out);
    CHECK(thrown_kind([&] { beam_search(m, src, 0, BeamConfig{0, 1.1, 7}); }) == ErrorKind::kInput);
  }
}

TEST_SUITE("language embeddings") {
  TEST_CASE("extraction copies the table in code order") {
    TransformerModel m(small_config(12), {"zz", "aa", "mm"}, 13);
    const auto set = m.extract_language_embeddings();
    CHECK(set.codes == std::vector<std::string>{"aa", "mm", "zz"});
    CHECK(set.matrix == m.parameter("lang_emb").value());
    for (double v : set.matrix.data()) CHECK(std::abs(v) <= 0.1);
    TransformerModel single(small_config(12), {"aa"}, 13);
    CHECK(single.extract_language_embeddings().count() == 1);
  }

  TEST_CASE("TSV export round trips exactly") {
    oracle::TempDir dir("embeddings");
    TransformerModel m(small_config(12), {"de", "fr"}, 14);
    const auto set = m.extract_language_embeddings();
    save_embeddings_tsv(set, dir.file("e.tsv"));
    CHECK(load_embeddings_tsv(dir.file("e.tsv")) == set);
    oracle::write_text(dir.file("ragged.tsv"), "de\t1\t2\nfr\t1\n");
    oracle::write_text(dir.file("nan.tsv"), "de\t1\tx\n");
    CHECK(thrown_kind([&] { load_embeddings_tsv(dir.file("ragged.tsv")); }) == ErrorKind::kParse);
    CHECK(thrown_kind([&] { load_embeddings_tsv(dir.file("nan.tsv")); }) == ErrorKind::kParse);
    LanguageEmbeddingSet dup{{"de", "de"}, Tensor({2, 2})};
    CHECK(thrown_kind([&] { dup.validate(); }) == ErrorKind::kInput);
  }
}

TEST_SUITE("checkpoints") {
  TEST_CASE("save and load round trip") {
    oracle::TempDir dir("checkpoint");
    TransformerModel m(small_config(12), {"de", "fr"}, 15);
    m.save(dir.file("m.bin"), "vocab.tsv");
    std::string ref;
    const auto back = TransformerModel::load(dir.file("m.bin"), &ref);
    CHECK(ref == "vocab.tsv");
    CHECK(back.config() == m.config());
    CHECK(back.languages() == m.languages());
    for (std::size_t i = 0; i < m.parameters().size(); ++i) {
      CHECK(back.parameters()[i].value() == m.parameters()[i].value());
    }
  }

  TEST_CASE("damaged files are parse errors") {
    oracle::TempDir dir("checkpoint_bad");
    TransformerModel m(small_config(12), {"de"}, 16);
    m.save(dir.file("m.bin"));
    auto bytes = oracle::read_text(dir.file("m.bin"));
    oracle::write_text(dir.file("short.bin"), bytes.substr(0, bytes.size() - 9));
    oracle::write_text(dir.file("junk.bin"), "definitely not a model");
    CHECK(thrown_kind([&] { TransformerModel::load(dir.file("short.bin")); }) == ErrorKind::kParse);
    CHECK(thrown_kind([&] { TransformerModel::load(dir.file("junk.bin")); }) == ErrorKind::kParse);
    CHECK(thrown_kind([&] { TransformerModel::load(dir.file("none.bin")); }) == ErrorKind::kIo);
  }
}

TEST_SUITE("training loop") {
  std::vector<ParallelCorpus> toy_corpora() {
    Rng rng(21);
    std::vector<ParallelCorpus> out;
    for (const char* code : {"xa", "xb"}) {
      ParallelCorpus c{code, Direction::kToPivot, {}};
      for (int i = 0; i < 12; ++i) {
        std::vector<TokenId> src(2 + rng.below(4));
        for (auto& t : src) t = 4 + rng.below(7);
        c.pairs.push_back({src, {src.rbegin(), src.rend()}});
      }
      out.push_back(c);
    }
    return out;
  }

  TEST_CASE("chunked accumulation matches a full-batch update") {
    const auto corpora = toy_corpora();
    TrainConfig cfg;
    cfg.steps = 3;
    cfg.tokens_per_lang = 16;
    cfg.warmup_steps = 10;
    TransformerModel whole(oracle::toy_model_config(), {"xa", "xb"}, 3);
    TransformerModel chunked(oracle::toy_model_config(), {"xa", "xb"}, 3);
    cfg.chunk_tokens = 0;
    const auto a = train_model(whole, corpora, cfg);
    cfg.chunk_tokens = 12;
    const auto b = train_model(chunked, corpora, cfg);
    for (std::size_t s = 0; s < 3; ++s) CHECK(a.losses[s] == doctest::Approx(b.losses[s]).epsilon(1e-12));
    for (std::size_t i = 0; i < whole.parameters().size(); ++i) {
      CHECK(max_abs_diff(whole.parameters()[i].value(), chunked.parameters()[i].value()) <= 1e-10);
    }
  }

  TEST_CASE("loss falls, checkpoints fire, parameters stay finite") {
    const auto corpora = toy_corpora();
    TrainConfig cfg;
    cfg.steps = 300;
    cfg.tokens_per_lang = 16;
    cfg.warmup_steps = 50;
    cfg.lr_scale = 2.0;
    TransformerModel m(oracle::toy_model_config(), {"xa", "xb"}, 4);
    std::vector<std::size_t> seen;
    const auto r = train_model(m, corpora, cfg, {100, 250, 999}, [&](std::size_t step, const TransformerModel& model) {
      seen.push_back(step);
      for (const auto& p : model.parameters()) CHECK(p.value().all_finite());
    });
    CHECK(seen == std::vector<std::size_t>{100, 250});
    CHECK(r.steps == 300);
    double first = 0.0, last = 0.0;
    for (std::size_t s = 0; s < 50; ++s) {
      first += r.losses[s];
      last += r.losses[250 + s];
    }
    CHECK(last < 0.5 * first);
    const auto examples = corpus_examples(m, corpora);
    CHECK(evaluate_loss(m, examples, 8) == doctest::Approx(evaluate_loss(m, examples, 0)).epsilon(1e-12));
  }

  TEST_CASE("training is deterministic") {
    const auto corpora = toy_corpora();
    TrainConfig cfg;
    cfg.steps = 20;
    cfg.tokens_per_lang = 16;
    TransformerModel a(oracle::toy_model_config(), {"xa", "xb"}, 5);
    TransformerModel b(oracle::toy_model_config(), {"xa", "xb"}, 5);
    CHECK(train_model(a, corpora, cfg).losses == train_model(b, corpora, cfg).losses);
  }

  TEST_CASE("non-finite values abort with a divergence error") {
    const auto corpora = toy_corpora();
    TrainConfig cfg;
    cfg.steps = 5;
    cfg.tokens_per_lang = 16;
    TransformerModel m(oracle::toy_model_config(), {"xa", "xb"}, 6);
    m.parameter("tok_emb").mutable_value()[4 * 8] = NAN;
    m.parameter("tok_emb").mutable_value()[5 * 8] = NAN;
    m.parameter("tok_emb").mutable_value()[6 * 8] = NAN;
    CHECK(thrown_kind([&] { train_model(m, corpora, cfg); }) == ErrorKind::kDivergence);
    TransformerModel ok(oracle::toy_model_config(), {"xa", "xb"}, 6);
    cfg.steps = 0;
    CHECK(thrown_kind([&] { train_model(ok, corpora, cfg); }) == ErrorKind::kInput);
  }
}
