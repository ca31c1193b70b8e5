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


// Independent reference implementations used as test oracles. None of these
// share code with the library routines they check.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "langclust/cluster.hpp"
#include "langclust/model.hpp"
#include "langclust/tensor.hpp"

namespace oracle {

using langclust::Tensor;
using langclust::Var;

/// Worst norm-wise relative error ||analytic - numeric|| / max(||analytic||,
/// ||numeric||) over the parameters, with central differences of step h.
/// Parameters whose gradients are both below `floor` count as agreeing.
inline double gradient_error(std::span<Var> params, const std::function<Var()>& loss,
                             double h = 1e-4, double floor = 1e-10) {
  for (auto& p : params) p.zero_grad();
  langclust::backward(loss());
  double worst = 0.0;
  for (auto& p : params) {
    const Tensor analytic = p.grad().empty() ? Tensor(p.shape(), 0.0) : p.grad();
    Tensor& value = p.mutable_value();
    double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double saved = value[i];
      double up, down;
      {
        langclust::NoGradGuard guard;
        value[i] = saved + h;
        up = loss().value().item();
        value[i] = saved - h;
        down = loss().value().item();
      }
      value[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      diff2 += (analytic[i] - numeric) * (analytic[i] - numeric);
      a2 += analytic[i] * analytic[i];
      n2 += numeric * numeric;
    }
    const double scale = std::sqrt(std::max(a2, n2));
    if (scale < floor) continue;
    worst = std::max(worst, std::sqrt(diff2) / scale);
  }
  for (auto& p : params) p.zero_grad();
  return worst;
}

/// e^x_i / sum_j e^x_j evaluated in long double without max subtraction
/// (inputs must be moderate).
inline std::vector<long double> softmax_ld(std::span<const double> x) {
  long double total = 0.0L;
  std::vector<long double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) total += out[i] = std::exp(static_cast<long double>(x[i]));
  for (auto& v : out) v /= total;
  return out;
}

/// Mean over rows of log(sum_j e^z_j) - z_target in long double.
inline long double cross_entropy_ld(const Tensor& logits, std::span<const std::size_t> targets) {
  const std::size_t rows = logits.dim(0), cols = logits.dim(1);
  long double total = 0.0L;
  for (std::size_t r = 0; r < rows; ++r) {
    long double z = 0.0L;
    for (std::size_t c = 0; c < cols; ++c) z += std::exp(static_cast<long double>(logits[r * cols + c]));
    total += std::log(z) - static_cast<long double>(logits[r * cols + targets[r]]);
  }
  return total / static_cast<long double>(rows);
}

/// Word-internal symbols of an ASCII word, the last one carrying "</w>".
inline std::vector<std::string> ascii_symbols(const std::string& word) {
  std::vector<std::string> out;
  for (char c : word) out.emplace_back(1, c);
  out.back() += "</w>";
  return out;
}

/// Merges every left-to-right non-overlapping occurrence of (left, right).
inline void merge_pair(std::vector<std::string>& symbols, const std::string& left,
                       const std::string& right) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (i + 1 < symbols.size() && symbols[i] == left && symbols[i + 1] == right) {
      out.push_back(left + right);
      ++i;
    } else {
      out.push_back(symbols[i]);
    }
  }
  symbols = std::move(out);
}

/// BPE learning by full recount of every adjacent pair at every step.
inline std::vector<std::pair<std::string, std::string>> naive_bpe(
    const std::map<std::string, std::uint64_t>& word_counts, std::size_t num_merges) {
  std::vector<std::pair<std::vector<std::string>, std::uint64_t>> words;
  for (const auto& [w, c] : word_counts) words.push_back({ascii_symbols(w), c});
  std::vector<std::pair<std::string, std::string>> merges;
  while (merges.size() < num_merges) {
    std::map<std::pair<std::string, std::string>, std::uint64_t> counts;
    for (const auto& [s, c] : words) {
      for (std::size_t i = 0; i + 1 < s.size(); ++i) counts[{s[i], s[i + 1]}] += c;
    }
    if (counts.empty()) break;
    auto best = counts.begin();
    for (auto it = counts.begin(); it != counts.end(); ++it) {
      if (it->second > best->second) best = it;
    }
    merges.push_back(best->first);
    for (auto& [s, c] : words) merge_pair(s, best->first.first, best->first.second);
  }
  return merges;
}

/// Replays a merge list in order on one ASCII word.
inline std::vector<std::string> replay_merges(
    const std::string& word, const std::vector<std::pair<std::string, std::string>>& merges) {
  auto symbols = ascii_symbols(word);
  for (const auto& [l, r] : merges) merge_pair(symbols, l, r);
  return symbols;
}

/// Exhaustive linkage: every step recomputes the mean (or min, or max)
/// pairwise distance between all live clusters from the original matrix. Clusters are
/// kept ordered by their smallest member; ties go to the lexicographically
/// smallest pair of smallest members.
inline langclust::Dendrogram brute_force_linkage(
    const langclust::DistanceMatrix& d, std::vector<std::string> labels,
    langclust::Linkage linkage = langclust::Linkage::kAverage) {
  const std::size_t n = d.n;
  struct Cluster {
    std::set<std::size_t> members;
    std::size_t node;
  };
  std::vector<Cluster> live;
  for (std::size_t i = 0; i < n; ++i) live.push_back({{i}, i});
  langclust::Dendrogram out{std::move(labels), {}};
  for (std::size_t step = 0; step + 1 < n; ++step) {
    std::sort(live.begin(), live.end(),
              [](const Cluster& a, const Cluster& b) { return *a.members.begin() < *b.members.begin(); });
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < live.size(); ++i) {
      for (std::size_t j = i + 1; j < live.size(); ++j) {
        double total = 0.0, lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (auto x : live[i].members) {
          for (auto y : live[j].members) {
            total += d(x, y);
            lo = std::min(lo, d(x, y));
            hi = std::max(hi, d(x, y));
          }
        }
        double link = total / static_cast<double>(live[i].members.size() * live[j].members.size());
        if (linkage == langclust::Linkage::kSingle) link = lo;
        if (linkage == langclust::Linkage::kComplete) link = hi;
        if (link < best) {
          best = link;
          bi = i;
          bj = j;
        }
      }
    }
    out.merges.push_back({live[bi].node, live[bj].node, best, n + step});
    live[bi].members.insert(live[bj].members.begin(), live[bj].members.end());
    live[bi].node = n + step;
    live.erase(live.begin() + static_cast<std::ptrdiff_t>(bj));
  }
  return out;
}

/// Flat partition after keeping the first n-k merges, as sets of leaves.
inline std::set<std::set<std::size_t>> partition_after(const langclust::Dendrogram& d,
                                                       std::size_t k) {
  const std::size_t n = d.leaves();
  std::map<std::size_t, std::set<std::size_t>> sets;
  for (std::size_t i = 0; i < n; ++i) sets[i] = {i};
  for (std::size_t s = 0; s + k < n; ++s) {
    const auto& m = d.merges[s];
    auto merged = sets.at(m.a);
    merged.insert(sets.at(m.b).begin(), sets.at(m.b).end());
    sets.erase(m.a);
    sets.erase(m.b);
    sets[m.node] = merged;
  }
  std::set<std::set<std::size_t>> out;
  for (auto& [_, s] : sets) out.insert(s);
  return out;
}

/// Corpus BLEU straight from the definition: clipped n-gram precisions for
/// n = 1..4 pooled over the corpus, their geometric mean, and the brevity
/// penalty exp(1 - r/c) when c <= r. Returns a value on the 0..100 scale.
inline double reference_bleu(const std::vector<std::vector<std::string>>& hyps,
                             const std::vector<std::vector<std::string>>& refs) {
  double c = 0.0, r = 0.0;
  double num[4] = {0, 0, 0, 0}, den[4] = {0, 0, 0, 0};
  for (std::size_t s = 0; s < hyps.size(); ++s) {
    c += static_cast<double>(hyps[s].size());
    r += static_cast<double>(refs[s].size());
    for (std::size_t n = 1; n <= 4; ++n) {
      std::map<std::vector<std::string>, int> hyp_counts, ref_counts;
      for (std::size_t i = 0; i + n <= hyps[s].size(); ++i) {
        ++hyp_counts[std::vector<std::string>(hyps[s].begin() + i, hyps[s].begin() + i + n)];
      }
      for (std::size_t i = 0; i + n <= refs[s].size(); ++i) {
        ++ref_counts[std::vector<std::string>(refs[s].begin() + i, refs[s].begin() + i + n)];
      }
      for (const auto& [gram, count] : hyp_counts) {
        const auto it = ref_counts.find(gram);
        num[n - 1] += std::min(count, it == ref_counts.end() ? 0 : it->second);
        den[n - 1] += count;
      }
    }
  }
  if (c == 0.0) return 0.0;
  double product = 1.0;
  for (int n = 0; n < 4; ++n) {
    if (num[n] == 0.0) return 0.0;
    product *= num[n] / den[n];
  }
  const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
  return 100.0 * bp * std::pow(product, 0.25);
}

/// Best completed hypothesis over every token sequence up to max_len, scored
/// like beam search: log-probability over the length penalty, EOS counted in
/// the length; a sequence reaching max_len without EOS also completes.
inline langclust::Hypothesis exhaustive_decode(const langclust::StepScorer& scorer,
                                               langclust::TokenId eos, std::size_t max_len,
                                               double alpha) {
  langclust::Hypothesis best;
  best.score = -std::numeric_limits<double>::infinity();
  std::function<void(std::vector<langclust::TokenId>&, double)> walk =
      [&](std::vector<langclust::TokenId>& prefix, double lp) {
        const auto row = scorer({prefix}).front();
        for (langclust::TokenId t = 0; t < row.size(); ++t) {
          if (!std::isfinite(row[t])) continue;
          const double total = lp + row[t];
          if (t == eos) {
            const double s = total / langclust::length_penalty(prefix.size() + 1, alpha);
            if (s > best.score) best = {prefix, total, s};
            continue;
          }
          prefix.push_back(t);
          if (prefix.size() == max_len) {
            const double s = total / langclust::length_penalty(prefix.size(), alpha);
            if (s > best.score) best = {prefix, total, s};
          } else {
            walk(prefix, total);
          }
          prefix.pop_back();
        }
      };
  std::vector<langclust::TokenId> prefix;
  walk(prefix, 0.0);
  return best;
}

}  // namespace oracle
