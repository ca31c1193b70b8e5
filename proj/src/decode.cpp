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

#include <algorithm>
#include <cmath>
#include <limits>

#include "langclust/error.hpp"
#include "langclust/model.hpp"

namespace langclust {
namespace {

struct Candidate {
  std::size_t parent;
  TokenId token;
  double log_prob;
};

StepScorer model_scorer(const TransformerModel& model, std::span<const TokenId> src,
                        std::size_t lang, TokenId reserved_end) {
  auto memory = std::make_shared<Tensor>(model.encode(src, lang));
  std::vector<TokenId> source(src.begin(), src.end());
  return [&model, memory, source = std::move(source),
          reserved_end](const std::vector<std::vector<TokenId>>& prefixes) {
    auto out = model.next_token_logprobs(*memory, source, prefixes);
    for (auto& row : out) {
      for (TokenId t = 0; t < row.size() && t < reserved_end; ++t) {
        if (t != Vocabulary::kEos) row[t] = -std::numeric_limits<double>::infinity();
      }
    }
    return out;
  };
}

}  // namespace

void BeamConfig::validate() const {
  if (beam_size == 0) fail(ErrorKind::kInput, "beam_size must be >= 1");
  if (max_decode_len == 0) fail(ErrorKind::kInput, "max_decode_len must be >= 1");
  if (!std::isfinite(alpha)) fail(ErrorKind::kInput, "alpha must be finite");
}

double length_penalty(std::size_t length, double alpha) {
  return std::pow((5.0 + static_cast<double>(length)) / 6.0, alpha);
}

Hypothesis beam_search(const StepScorer& scorer, TokenId eos, const BeamConfig& cfg) {
  cfg.validate();
  std::vector<Hypothesis> live{Hypothesis{}};
  std::vector<Hypothesis> finished;
  for (std::size_t step = 0; step < cfg.max_decode_len && !live.empty(); ++step) {
    std::vector<std::vector<TokenId>> prefixes;
    prefixes.reserve(live.size());
    for (const auto& h : live) prefixes.push_back(h.tokens);
    const auto logprobs = scorer(prefixes);
    std::vector<Candidate> candidates;
    for (std::size_t i = 0; i < live.size(); ++i) {
      for (TokenId t = 0; t < logprobs[i].size(); ++t) {
        const double lp = logprobs[i][t];
        if (std::isfinite(lp)) candidates.push_back({i, t, live[i].log_prob + lp});
      }
    }
    // Ties resolve toward the earlier hypothesis, then the lower token id.
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) { return a.log_prob > b.log_prob; });
    if (candidates.size() > cfg.beam_size) candidates.resize(cfg.beam_size);
    std::vector<Hypothesis> next;
    const bool last_step = step + 1 == cfg.max_decode_len;
    for (const auto& c : candidates) {
      Hypothesis h;
      h.tokens = live[c.parent].tokens;
      h.log_prob = c.log_prob;
      if (c.token == eos) {
        h.score = h.log_prob / length_penalty(h.tokens.size() + 1, cfg.alpha);
        finished.push_back(std::move(h));
      } else {
        h.tokens.push_back(c.token);
        if (last_step) {
          h.score = h.log_prob / length_penalty(h.tokens.size(), cfg.alpha);
          finished.push_back(std::move(h));
        } else {
          next.push_back(std::move(h));
        }
      }
    }
    live = std::move(next);
    if (finished.size() >= cfg.beam_size) break;
  }
  if (finished.empty()) return Hypothesis{};
  auto best = std::max_element(finished.begin(), finished.end(),
                               [](const Hypothesis& a, const Hypothesis& b) { return a.score < b.score; });
  return *best;
}

std::vector<TokenId> greedy_decode(const StepScorer& scorer, TokenId eos,
                                   std::size_t max_decode_len) {
  std::vector<TokenId> out;
  for (std::size_t step = 0; step < max_decode_len; ++step) {
    const auto row = scorer({out}).front();
    TokenId best = 0;
    double best_lp = -std::numeric_limits<double>::infinity();
    for (TokenId t = 0; t < row.size(); ++t) {
      if (row[t] > best_lp) {
        best_lp = row[t];
        best = t;
      }
    }
    if (best == eos) break;
    out.push_back(best);
  }
  return out;
}

std::vector<TokenId> beam_search(const TransformerModel& model, std::span<const TokenId> src,
                                 std::size_t lang, const BeamConfig& cfg,
                                 TokenId first_output_id) {
  return beam_search(model_scorer(model, src, lang, first_output_id), Vocabulary::kEos, cfg).tokens;
}

std::vector<TokenId> greedy_decode(const TransformerModel& model, std::span<const TokenId> src,
                                   std::size_t lang, std::size_t max_decode_len,
                                   TokenId first_output_id) {
  return greedy_decode(model_scorer(model, src, lang, first_output_id), Vocabulary::kEos,
                       max_decode_len);
}

}  // namespace langclust
