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
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "langclust/embeddings.hpp"
#include "langclust/rng.hpp"
#include "langclust/subword.hpp"
#include "langclust/tensor.hpp"

namespace langclust {

struct ModelConfig {
  std::size_t d_model = 32;
  std::size_t d_ff = 128;
  std::size_t num_layers = 2;
  std::size_t num_heads = 2;
  std::size_t vocab_size = 0;
  std::size_t lang_emb_dim = 32;
  std::size_t max_len = 64;
  double dropout = 0.0;

  void validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// One tagged sentence pair; `lang` indexes the model's language table.
struct Example {
  std::size_t lang = 0;
  std::vector<TokenId> src;
  std::vector<TokenId> tgt;
};

/// Optional capture of intermediate values for inspection.
struct ForwardTrace {
  Tensor encoder_input;                 // [batch, src_len, d_model]
  std::vector<Tensor> attention;        // every attention map, [batch*heads, q, k]
};

class TransformerModel {
 public:
  /// Languages are stored sorted by code; their position is the language id.
  TransformerModel(ModelConfig config, std::vector<std::string> lang_codes,
                   std::uint64_t seed);

  const ModelConfig& config() const noexcept { return config_; }
  const std::vector<std::string>& languages() const noexcept { return languages_; }
  std::size_t lang_index(std::string_view code) const;

  std::vector<Var>& parameters() noexcept { return params_; }
  const std::vector<Var>& parameters() const noexcept { return params_; }
  const std::vector<std::string>& parameter_names() const noexcept { return names_; }
  Var& parameter(std::string_view name);
  const Var& parameter(std::string_view name) const;
  void zero_grad();

  /// Encoder states for one sentence, [len, d_model].
  Tensor encode(std::span<const TokenId> src, std::size_t lang,
                ForwardTrace* trace = nullptr) const;

  /// Mean token negative log-likelihood under teacher forcing. PAD is
  /// excluded; `dropout_rng` enables dropout when the config asks for it.
  Var loss(std::span<const Example> batch, Rng* dropout_rng = nullptr,
           ForwardTrace* trace = nullptr) const;

  /// Decoder logits [tgt_in.size(), vocab] for decoder input `tgt_in`
  /// (BOS-prefixed), as used during training.
  Tensor decoder_logits(std::span<const TokenId> src, std::size_t lang,
                        std::span<const TokenId> tgt_in) const;

  /// Next-token log-probabilities for several prefixes (BOS excluded) that
  /// share one source sentence.
  std::vector<std::vector<double>> next_token_logprobs(
      const Tensor& memory, std::span<const TokenId> src,
      const std::vector<std::vector<TokenId>>& prefixes) const;

  LanguageEmbeddingSet extract_language_embeddings() const;

  void save(const std::string& path, const std::string& vocab_ref = {}) const;
  static TransformerModel load(const std::string& path, std::string* vocab_ref = nullptr);

 private:
  struct Padded;
  Var& add_param(const std::string& name, Tensor value);
  Var embed_source(const Padded& p, Rng* rng, ForwardTrace* trace) const;
  Var run_encoder(const Padded& p, Rng* rng, ForwardTrace* trace) const;
  Var run_decoder(const Var& memory, const Padded& p, Rng* rng, ForwardTrace* trace) const;
  Var attention(const std::string& prefix, const Var& query, const Var& keys,
                std::size_t batch, std::size_t q_len, std::size_t k_len,
                const Tensor& mask, Rng* rng, ForwardTrace* trace) const;
  Var feed_forward(const std::string& prefix, const Var& x, Rng* rng) const;
  Var dropout(const Var& x, Rng* rng) const;
  Var norm(const std::string& prefix, const Var& x) const;
  Tensor positional(std::size_t len) const;

  ModelConfig config_;
  std::vector<std::string> languages_;
  std::vector<Var> params_;
  std::vector<std::string> names_;
};

/// Incremental scorer: log-probabilities of the next token for each prefix.
using StepScorer =
    std::function<std::vector<std::vector<double>>(const std::vector<std::vector<TokenId>>&)>;

struct BeamConfig {
  std::size_t beam_size = 6;
  double alpha = 1.1;
  std::size_t max_decode_len = 64;

  void validate() const;
};

/// ((5 + n) / 6)^alpha, n counting generated tokens including EOS.
double length_penalty(std::size_t length, double alpha);

struct Hypothesis {
  std::vector<TokenId> tokens;  // without EOS
  double log_prob = 0.0;
  double score = 0.0;           // log_prob / length_penalty
};

Hypothesis beam_search(const StepScorer& scorer, TokenId eos, const BeamConfig& cfg);
std::vector<TokenId> greedy_decode(const StepScorer& scorer, TokenId eos,
                                   std::size_t max_decode_len);

/// Beam search with the model. Ids below `first_output_id` (PAD, BOS, UNK,
/// language tags) are never emitted, except EOS.
std::vector<TokenId> beam_search(const TransformerModel& model, std::span<const TokenId> src,
                                 std::size_t lang, const BeamConfig& cfg,
                                 TokenId first_output_id = Vocabulary::kNumSpecial);
std::vector<TokenId> greedy_decode(const TransformerModel& model, std::span<const TokenId> src,
                                   std::size_t lang, std::size_t max_decode_len,
                                   TokenId first_output_id = Vocabulary::kNumSpecial);

}  // namespace langclust
