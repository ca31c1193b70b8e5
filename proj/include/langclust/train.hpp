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
#include <vector>

#include "langclust/data.hpp"
#include "langclust/model.hpp"

namespace langclust {

struct TrainConfig {
  std::size_t steps = 3000;
  std::size_t tokens_per_lang = 512;
  std::uint64_t warmup_steps = 4000;
  double lr_scale = 1.0;     // multiplies the inverse-sqrt schedule
  double clip_norm = 5.0;
  std::uint64_t seed = 1;
  /// Padded tokens per forward chunk. Chunks are length-sorted slices of one
  /// batch whose gradients are summed with token weights, so the update is
  /// the same as one full-batch pass. 0 disables chunking.
  std::size_t chunk_tokens = 1024;
  std::size_t log_every = 0;  // 0 = silent
};

struct TrainResult {
  std::vector<double> losses;  // per step, token-weighted batch mean
  std::size_t steps = 0;
};

/// Called after the listed steps (1-based).
using CheckpointFn = std::function<void(std::size_t step, const TransformerModel& model)>;

/// Trains on all `corpora` at once: every step takes one group per language
/// from a BatchStream. Corpus i must be registered in the model under its
/// lang_code. A non-finite loss aborts with a divergence error.
TrainResult train_model(TransformerModel& model, const std::vector<ParallelCorpus>& corpora,
                        const TrainConfig& config,
                        const std::vector<std::size_t>& checkpoint_steps = {},
                        const CheckpointFn& on_checkpoint = {});

/// Token-weighted mean loss over `examples`, no gradient.
double evaluate_loss(const TransformerModel& model, const std::vector<Example>& examples,
                     std::size_t chunk_tokens = 1024);

/// Examples for a list of corpora, language ids resolved through the model.
std::vector<Example> corpus_examples(const TransformerModel& model,
                                     const std::vector<ParallelCorpus>& corpora);

}  // namespace langclust
