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

#include "langclust/bleu.hpp"

#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <map>

#include "langclust/error.hpp"
#include "langclust/subword.hpp"

namespace langclust {
namespace {

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts count_ngrams(const TokenSeq& tokens, std::size_t n) {
  NgramCounts counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[TokenSeq(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                      tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

}  // namespace

double BleuReport::ratio() const noexcept {
  return ref_len == 0 ? 0.0 : static_cast<double>(hyp_len) / static_cast<double>(ref_len);
}

std::string BleuReport::summary() const {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "BLEU = %.2f, %.1f/%.1f/%.1f/%.1f (BP=%.3f, ratio=%.3f, hyp_len=%zu, ref_len=%zu)",
                bleu, 100.0 * precisions[0], 100.0 * precisions[1], 100.0 * precisions[2],
                100.0 * precisions[3], brevity_penalty, ratio(), hyp_len, ref_len);
  return buf;
}

std::string BleuReport::to_json() const {
  nlohmann::json j{{"bleu", bleu},         {"precisions", precisions},
                   {"matches", matches},   {"totals", totals},
                   {"brevity_penalty", brevity_penalty},
                   {"hyp_len", hyp_len},   {"ref_len", ref_len}};
  return j.dump(2);
}

BleuReport BleuReport::from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    BleuReport r;
    r.bleu = j.at("bleu").get<double>();
    r.precisions = j.at("precisions").get<std::array<double, 4>>();
    r.matches = j.at("matches").get<std::array<std::size_t, 4>>();
    r.totals = j.at("totals").get<std::array<std::size_t, 4>>();
    r.brevity_penalty = j.at("brevity_penalty").get<double>();
    r.hyp_len = j.at("hyp_len").get<std::size_t>();
    r.ref_len = j.at("ref_len").get<std::size_t>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kParse, std::string("BLEU report JSON: ") + e.what());
  }
}

BleuReport corpus_bleu(const std::vector<TokenSeq>& hypotheses,
                       const std::vector<TokenSeq>& references) {
  if (hypotheses.size() != references.size()) {
    fail(ErrorKind::kInput, "corpus_bleu: " + std::to_string(hypotheses.size()) +
                                " hypotheses but " + std::to_string(references.size()) +
                                " references");
  }
  BleuReport r;
  for (std::size_t s = 0; s < hypotheses.size(); ++s) {
    const auto& hyp = hypotheses[s];
    const auto& ref = references[s];
    r.hyp_len += hyp.size();
    r.ref_len += ref.size();
    for (std::size_t n = 1; n <= 4; ++n) {
      const auto h = count_ngrams(hyp, n);
      const auto rc = count_ngrams(ref, n);
      for (const auto& [gram, count] : h) {
        auto it = rc.find(gram);
        if (it != rc.end()) r.matches[n - 1] += std::min(count, it->second);
      }
      if (hyp.size() >= n) r.totals[n - 1] += hyp.size() - n + 1;
    }
  }
  for (std::size_t n = 0; n < 4; ++n) {
    r.precisions[n] = r.totals[n] == 0 ? 0.0
                                       : static_cast<double>(r.matches[n]) /
                                             static_cast<double>(r.totals[n]);
  }
  if (r.hyp_len == 0) return r;  // no output: BLEU and BP are both 0
  r.brevity_penalty = r.hyp_len < r.ref_len
                          ? std::exp(1.0 - static_cast<double>(r.ref_len) /
                                               static_cast<double>(r.hyp_len))
                          : 1.0;
  double log_sum = 0.0;
  for (double p : r.precisions) {
    if (p == 0.0) return r;
    log_sum += 0.25 * std::log(p);
  }
  r.bleu = 100.0 * r.brevity_penalty * std::exp(log_sum);
  return r;
}

BleuReport corpus_bleu_text(const std::vector<std::string>& hypotheses,
                            const std::vector<std::string>& references) {
  std::vector<TokenSeq> h, r;
  h.reserve(hypotheses.size());
  r.reserve(references.size());
  for (const auto& line : hypotheses) h.push_back(split_whitespace(line));
  for (const auto& line : references) r.push_back(split_whitespace(line));
  return corpus_bleu(h, r);
}

}  // namespace langclust
