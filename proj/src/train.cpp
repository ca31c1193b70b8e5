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


#include "langclust/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "langclust/error.hpp"
#include "langclust/log.hpp"
#include "langclust/optim.hpp"

namespace langclust {
namespace {

// Length-sorted slices of `examples`, each within the padded-token budget.
std::vector<std::vector<Example>> make_chunks(std::vector<Example> examples,
                                              std::size_t chunk_tokens) {
  std::vector<std::vector<Example>> chunks;
  if (chunk_tokens == 0) {
    chunks.push_back(std::move(examples));
    return chunks;
  }
  std::stable_sort(examples.begin(), examples.end(), [](const Example& a, const Example& b) {
    return std::max(a.src.size(), a.tgt.size() + 1) < std::max(b.src.size(), b.tgt.size() + 1);
  });
  std::vector<Example> current;
  std::size_t width = 0;
  for (auto& ex : examples) {
    const std::size_t w = std::max(width, std::max(ex.src.size(), ex.tgt.size() + 1));
    if (!current.empty() && w * (current.size() + 1) > chunk_tokens) {
      chunks.push_back(std::move(current));
      current.clear();
      width = 0;
    }
    width = std::max(width, std::max(ex.src.size(), ex.tgt.size() + 1));
    current.push_back(std::move(ex));
  }
  if (!current.empty()) chunks.push_back(std::move(current));
  return chunks;
}

std::size_t target_tokens(const std::vector<Example>& examples) {
  std::size_t n = 0;
  for (const auto& ex : examples) n += ex.tgt.size() + 1;
  return n;
}

}  // namespace

std::vector<Example> corpus_examples(const TransformerModel& model,
                                     const std::vector<ParallelCorpus>& corpora) {
  std::vector<Example> out;
  for (const auto& c : corpora) {
    const auto lang = model.lang_index(c.lang_code);
    for (const auto& p : c.pairs) out.push_back(Example{lang, p.src, p.tgt});
  }
  return out;
}

double evaluate_loss(const TransformerModel& model, const std::vector<Example>& examples,
                     std::size_t chunk_tokens) {
  if (examples.empty()) fail(ErrorKind::kInput, "evaluate_loss: no examples");
  NoGradGuard guard;
  const double total = static_cast<double>(target_tokens(examples));
  double loss = 0.0;
  for (const auto& chunk : make_chunks(examples, chunk_tokens)) {
    loss += model.loss(chunk).value().item() * static_cast<double>(target_tokens(chunk)) / total;
  }
  return loss;
}

TrainResult train_model(TransformerModel& model, const std::vector<ParallelCorpus>& corpora,
                        const TrainConfig& config,
                        const std::vector<std::size_t>& checkpoint_steps,
                        const CheckpointFn& on_checkpoint) {
  if (config.steps == 0) fail(ErrorKind::kInput, "training needs at least one step");
  if (!(config.lr_scale > 0.0)) fail(ErrorKind::kInput, "lr_scale must be positive");
  std::vector<std::size_t> lang_ids;
  for (const auto& c : corpora) lang_ids.push_back(model.lang_index(c.lang_code));
  BatchStream stream(corpora, config.tokens_per_lang, config.seed);
  Rng dropout_rng(derive_seed(config.seed, "dropout"));
  Rng* drop = model.config().dropout > 0.0 ? &dropout_rng : nullptr;
  AdamState adam;
  const LrSchedule schedule{model.config().d_model, config.warmup_steps};
  TrainResult result;
  for (std::size_t step = 1; step <= config.steps; ++step) {
    const auto examples = stream.examples(stream.next(), lang_ids);
    const double total = static_cast<double>(target_tokens(examples));
    model.zero_grad();
    double step_loss = 0.0;
    for (const auto& chunk : make_chunks(examples, config.chunk_tokens)) {
      const double weight = static_cast<double>(target_tokens(chunk)) / total;
      Var loss = ops::scale(model.loss(chunk, drop), weight);
      step_loss += loss.value().item();
      backward(loss);
    }
    if (!std::isfinite(step_loss)) {
      const std::string last = result.losses.empty() ? std::string("none")
                                                     : std::to_string(result.losses.back());
      fail(ErrorKind::kDivergence, "training diverged at step " + std::to_string(step) +
                                       ": loss is not finite (last finite loss " + last + ")");
    }
    const double grad_norm = clip_grad_norm(model.parameters(), config.clip_norm);
    if (!std::isfinite(grad_norm)) {
      fail(ErrorKind::kDivergence,
           "training diverged at step " + std::to_string(step) + ": gradient norm is not finite");
    }
    adam_step(model.parameters(), adam, config.lr_scale * noam_lr(schedule, step));
    result.losses.push_back(step_loss);
    result.steps = step;
    if (config.log_every != 0 && step % config.log_every == 0) {
      log_info("step " + std::to_string(step) + " loss " + std::to_string(step_loss));
    }
    if (on_checkpoint &&
        std::find(checkpoint_steps.begin(), checkpoint_steps.end(), step) != checkpoint_steps.end()) {
      on_checkpoint(step, model);
    }
  }
  return result;
}

}  // namespace langclust
