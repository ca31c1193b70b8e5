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

#include "langclust/cluster.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <numeric>
#include <set>

#include "langclust/error.hpp"
#include "langclust/rng.hpp"

namespace langclust {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

double norm2(std::span<const double> u) {
  double s = 0.0;
  for (double x : u) s += x * x;
  return std::sqrt(s);
}

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

}  // namespace

const char* to_string(Metric m) { return m == Metric::kCosine ? "cosine" : "euclidean"; }

const char* to_string(Linkage l) {
  switch (l) {
    case Linkage::kAverage: return "average";
    case Linkage::kSingle: return "single";
    case Linkage::kComplete: return "complete";
  }
  return "average";
}

const char* to_string(ClusterMethod m) {
  switch (m) {
    case ClusterMethod::kEmbedding: return "embedding";
    case ClusterMethod::kFamily: return "family";
    case ClusterMethod::kRandom: return "random";
  }
  return "embedding";
}

Metric parse_metric(std::string_view text) {
  if (text == "cosine") return Metric::kCosine;
  if (text == "euclidean") return Metric::kEuclidean;
  fail(ErrorKind::kInput, "unknown metric '" + std::string(text) + "'");
}

Linkage parse_linkage(std::string_view text) {
  if (text == "average") return Linkage::kAverage;
  if (text == "single") return Linkage::kSingle;
  if (text == "complete") return Linkage::kComplete;
  fail(ErrorKind::kInput, "unknown linkage '" + std::string(text) + "'");
}

ClusterMethod parse_method(std::string_view text) {
  if (text == "embedding") return ClusterMethod::kEmbedding;
  if (text == "family") return ClusterMethod::kFamily;
  if (text == "random") return ClusterMethod::kRandom;
  fail(ErrorKind::kInput, "unknown clustering method '" + std::string(text) + "'");
}

double cosine_distance(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) fail(ErrorKind::kDimension, "cosine_distance: dimension mismatch");
  const double nu = norm2(u), nv = norm2(v);
  if (nu == 0.0 || nv == 0.0) fail(ErrorKind::kDomain, "cosine_distance: zero vector");
  double dot = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) dot += u[i] * v[i];
  const double cos = std::clamp(dot / (nu * nv), -1.0, 1.0);
  return 1.0 - cos;
}

double euclidean_distance(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) fail(ErrorKind::kDimension, "euclidean_distance: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += (u[i] - v[i]) * (u[i] - v[i]);
  return std::sqrt(s);
}

DistanceMatrix pairwise_distances(const LanguageEmbeddingSet& embeds, Metric metric) {
  embeds.validate();
  const std::size_t n = embeds.count(), d = embeds.dim();
  DistanceMatrix m{n, std::vector<double>(n * n, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    std::span<const double> u(embeds.matrix.raw() + i * d, d);
    for (std::size_t j = i + 1; j < n; ++j) {
      std::span<const double> v(embeds.matrix.raw() + j * d, d);
      const double dist = metric == Metric::kCosine ? cosine_distance(u, v) : euclidean_distance(u, v);
      m.values[i * n + j] = m.values[j * n + i] = dist;
    }
  }
  return m;
}

void Dendrogram::validate() const {
  const std::size_t n = labels.size();
  if (n == 0) fail(ErrorKind::kInput, "dendrogram has no leaves");
  if (merges.size() + 1 != n) fail(ErrorKind::kInput, "dendrogram needs n-1 merges");
  std::vector<bool> used(2 * n - 1, false);
  for (std::size_t i = 0; i < merges.size(); ++i) {
    const auto& m = merges[i];
    if (m.node != n + i || m.a >= m.node || m.b >= m.node || m.a == m.b || used[m.a] || used[m.b]) {
      fail(ErrorKind::kInput, "dendrogram merge " + std::to_string(i) + " is not a valid tree step");
    }
    used[m.a] = used[m.b] = true;
  }
}

Dendrogram agglomerate(const DistanceMatrix& distances, std::vector<std::string> labels,
                       Linkage linkage) {
  const std::size_t n = distances.n;
  if (n < 2) fail(ErrorKind::kInput, "agglomerative clustering needs at least 2 languages");
  if (labels.size() != n) fail(ErrorKind::kDimension, "label count does not match distances");
  // Slot i always holds the cluster whose smallest member row is i.
  std::vector<double> d = distances.values;
  std::vector<bool> active(n, true);
  std::vector<std::size_t> node(n), size(n, 1);
  std::iota(node.begin(), node.end(), 0);
  Dendrogram out{std::move(labels), {}};
  for (std::size_t step = 0; step + 1 < n; ++step) {
    std::size_t bi = 0, bj = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (active[j] && d[i * n + j] < best) {
          best = d[i * n + j];
          bi = i;
          bj = j;
        }
      }
    }
    out.merges.push_back({node[bi], node[bj], best, n + step});
    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k] || k == bi || k == bj) continue;
      const double dik = d[bi * n + k], djk = d[bj * n + k];
      double merged = 0.0;
      switch (linkage) {
        case Linkage::kAverage:
          merged = (static_cast<double>(size[bi]) * dik + static_cast<double>(size[bj]) * djk) /
                   static_cast<double>(size[bi] + size[bj]);
          break;
        case Linkage::kSingle: merged = std::min(dik, djk); break;
        case Linkage::kComplete: merged = std::max(dik, djk); break;
      }
      d[bi * n + k] = d[k * n + bi] = merged;
    }
    active[bj] = false;
    size[bi] += size[bj];
    node[bi] = n + step;
  }
  return out;
}

Dendrogram agglomerative_cluster(const LanguageEmbeddingSet& embeds, Linkage linkage,
                                 Metric metric) {
  if (embeds.count() < 2) {
    fail(ErrorKind::kInput, "agglomerative clustering needs at least 2 languages");
  }
  for (std::size_t i = 0; i < embeds.count(); ++i) {
    if (norm2(embeds.row(i)) == 0.0) {
      fail(ErrorKind::kDomain, "embedding for '" + embeds.codes[i] + "' is a zero vector");
    }
  }
  return agglomerate(pairwise_distances(embeds, metric), embeds.codes, linkage);
}

std::vector<std::vector<std::string>> ClusterAssignment::members() const {
  std::vector<std::vector<std::string>> out(k);
  for (std::size_t i = 0; i < codes.size(); ++i) out.at(cluster[i]).push_back(codes[i]);
  return out;
}

std::size_t ClusterAssignment::cluster_of(std::string_view code) const {
  for (std::size_t i = 0; i < codes.size(); ++i) {
    if (codes[i] == code) return cluster[i];
  }
  fail(ErrorKind::kLookup, "language '" + std::string(code) + "' is not in the assignment");
}

void ClusterAssignment::validate() const {
  if (codes.size() != cluster.size()) fail(ErrorKind::kInput, "assignment size mismatch");
  if (k == 0) fail(ErrorKind::kInput, "assignment must have at least one cluster");
  std::set<std::string> seen;
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < codes.size(); ++i) {
    if (!seen.insert(codes[i]).second) fail(ErrorKind::kInput, "language '" + codes[i] + "' assigned twice");
    if (cluster[i] >= k) fail(ErrorKind::kInput, "cluster index out of range");
    ++counts[cluster[i]];
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] == 0) fail(ErrorKind::kInput, "cluster " + std::to_string(c) + " is empty");
  }
}

ClusterAssignment cut_dendrogram(const Dendrogram& dendrogram, std::size_t k) {
  dendrogram.validate();
  const std::size_t n = dendrogram.leaves();
  if (k < 1 || k > n) {
    fail(ErrorKind::kInput, "cut: K=" + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
  }
  UnionFind uf(2 * n - 1);
  for (std::size_t i = 0; i < n - k; ++i) {
    const auto& m = dendrogram.merges[i];
    uf.unite(m.a, m.node);
    uf.unite(m.b, m.node);
  }
  ClusterAssignment out;
  out.method = ClusterMethod::kEmbedding;
  out.k = k;
  out.codes = dendrogram.labels;
  out.cluster.resize(n);
  std::map<std::size_t, std::size_t> numbering;
  for (std::size_t leaf = 0; leaf < n; ++leaf) {
    const auto root = uf.find(leaf);
    auto it = numbering.try_emplace(root, numbering.size()).first;
    out.cluster[leaf] = it->second;
  }
  return out;
}

double wcss(const LanguageEmbeddingSet& embeds, const ClusterAssignment& assignment) {
  embeds.validate();
  const std::size_t n = embeds.count(), d = embeds.dim();
  std::vector<std::size_t> cluster(n);
  for (std::size_t i = 0; i < n; ++i) cluster[i] = assignment.cluster_of(embeds.codes[i]);
  std::vector<std::vector<double>> unit(n);
  for (std::size_t i = 0; i < n; ++i) {
    unit[i] = embeds.row(i);
    const double len = norm2(unit[i]);
    if (len == 0.0) fail(ErrorKind::kDomain, "wcss: zero embedding for '" + embeds.codes[i] + "'");
    for (auto& x : unit[i]) x /= len;
  }
  double total = 0.0;
  for (std::size_t c = 0; c < assignment.k; ++c) {
    std::vector<double> centroid(d, 0.0);
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (cluster[i] != c) continue;
      for (std::size_t j = 0; j < d; ++j) centroid[j] += unit[i][j];
      ++count;
    }
    if (count == 0) continue;
    for (auto& x : centroid) x /= static_cast<double>(count);
    for (std::size_t i = 0; i < n; ++i) {
      if (cluster[i] != c) continue;
      for (std::size_t j = 0; j < d; ++j) total += (unit[i][j] - centroid[j]) * (unit[i][j] - centroid[j]);
    }
  }
  return total;
}

std::size_t knee_of_curve(std::span<const double> curve) {
  const std::size_t k_max = curve.size();
  if (k_max < 3) fail(ErrorKind::kInput, "elbow: k_max must be >= 3");
  const double x1 = 1.0, y1 = curve.front();
  const double x2 = static_cast<double>(k_max), y2 = curve.back();
  const double len = std::hypot(x2 - x1, y2 - y1);
  double scale = 0.0;
  for (double y : curve) scale = std::max(scale, std::abs(y));
  const double tie = 1e-12 * std::max(scale, 1.0);
  std::size_t best_k = 2;
  double best = -1.0;
  for (std::size_t k = 2; k < k_max; ++k) {
    const double x = static_cast<double>(k), y = curve[k - 1];
    const double dist = std::abs((x2 - x1) * (y1 - y) - (x1 - x) * (y2 - y1)) / len;
    if (dist > best + tie) {
      best = dist;
      best_k = k;
    }
  }
  return best_k;
}

ElbowResult elbow_optimal_k(const LanguageEmbeddingSet& embeds, const Dendrogram& dendrogram,
                            std::size_t k_max) {
  if (k_max < 3) fail(ErrorKind::kInput, "elbow: k_max must be >= 3");
  if (k_max > dendrogram.leaves()) fail(ErrorKind::kInput, "elbow: k_max exceeds language count");
  ElbowResult r;
  for (std::size_t k = 1; k <= k_max; ++k) r.wcss.push_back(wcss(embeds, cut_dendrogram(dendrogram, k)));
  r.k = knee_of_curve(r.wcss);
  return r;
}

TaxonomyTable::TaxonomyTable(std::map<std::string, std::string> family_of) {
  for (auto& [code, fam] : family_of) family_of_[lower(code)] = fam;
}

TaxonomyTable TaxonomyTable::builtin() {
  std::map<std::string, std::string> t;
  for (const char* c : {"bg", "cs", "de", "el", "es", "fa", "fr", "it", "nl", "pl", "pt", "ro",
                        "ru", "sk", "sl"}) {
    t[c] = "Indo-European";
  }
  t["hu"] = "Uralic";
  t["tr"] = "Turkic";
  t["ar"] = "Afroasiatic";
  t["he"] = "Afroasiatic";
  t["zh"] = "Sino-Tibetan";
  t["ja"] = "Japonic";
  t["th"] = "Kra-Dai";
  t["vi"] = "Austroasiatic";
  return TaxonomyTable(std::move(t));
}

TaxonomyTable TaxonomyTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot read taxonomy " + path);
  std::map<std::string, std::string> t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size()) {
      fail(ErrorKind::kParse, path + ":" + std::to_string(lineno) + ": expected code<TAB>family");
    }
    t[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return TaxonomyTable(std::move(t));
}

void TaxonomyTable::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path);
  for (const auto& [code, fam] : family_of_) out << code << '\t' << fam << '\n';
}

std::optional<std::string> TaxonomyTable::family(std::string_view code) const {
  auto it = family_of_.find(lower(code));
  if (it == family_of_.end()) return std::nullopt;
  return it->second;
}

ClusterAssignment cluster_by_family(const std::vector<std::string>& codes,
                                    const TaxonomyTable& taxonomy) {
  ClusterAssignment out;
  out.method = ClusterMethod::kFamily;
  out.codes = codes;
  std::map<std::string, std::size_t> index;
  for (const auto& code : codes) {
    auto fam = taxonomy.family(code);
    if (!fam) fail(ErrorKind::kCoverage, "taxonomy has no family for language '" + code + "'");
    auto it = index.try_emplace(*fam, index.size()).first;
    out.cluster.push_back(it->second);
  }
  out.k = index.size();
  out.validate();
  return out;
}

ClusterAssignment random_clusters(const std::vector<std::string>& codes, std::size_t k,
                                  std::uint64_t seed) {
  const std::size_t n = codes.size();
  if (k == 0 || k > n) {
    fail(ErrorKind::kInput, "random clustering: K=" + std::to_string(k) + " outside [1, " +
                                std::to_string(n) + "]");
  }
  Rng rng(derive_seed(seed, "random_clusters"));
  ClusterAssignment out;
  out.method = ClusterMethod::kRandom;
  out.k = k;
  out.codes = codes;
  out.cluster.assign(n, 0);
  while (true) {
    std::vector<std::size_t> counts(k, 0);
    for (auto& c : out.cluster) {
      c = static_cast<std::size_t>(rng.below(k));
      ++counts[c];
    }
    if (std::find(counts.begin(), counts.end(), 0) == counts.end()) break;
  }
  return out;
}

double rand_index(const ClusterAssignment& a, const ClusterAssignment& b) {
  std::vector<std::string> sa = a.codes, sb = b.codes;
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  if (sa != sb) fail(ErrorKind::kInput, "rand_index: partitions cover different languages");
  const std::size_t n = a.codes.size();
  if (n < 2) return 1.0;
  std::vector<std::size_t> cb(n);
  for (std::size_t i = 0; i < n; ++i) cb[i] = b.cluster_of(a.codes[i]);
  std::size_t agree = 0, total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool together_a = a.cluster[i] == a.cluster[j];
      const bool together_b = cb[i] == cb[j];
      agree += together_a == together_b;
      ++total;
    }
  }
  return static_cast<double>(agree) / static_cast<double>(total);
}

std::string dendrogram_to_json(const Dendrogram& d) {
  nlohmann::json j;
  j["labels"] = d.labels;
  auto& merges = j["merges"] = nlohmann::json::array();
  for (const auto& m : d.merges) {
    merges.push_back({{"a", m.a}, {"b", m.b}, {"height", m.height}, {"node", m.node}});
  }
  return j.dump(2);
}

Dendrogram dendrogram_from_json(const std::string& text) {
  try {
    auto j = nlohmann::json::parse(text);
    Dendrogram d;
    d.labels = j.at("labels").get<std::vector<std::string>>();
    for (const auto& m : j.at("merges")) {
      d.merges.push_back({m.at("a").get<std::size_t>(), m.at("b").get<std::size_t>(),
                          m.at("height").get<double>(), m.at("node").get<std::size_t>()});
    }
    d.validate();
    return d;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kParse, std::string("dendrogram JSON: ") + e.what());
  }
}

std::string assignment_to_json(const ClusterAssignment& a) {
  nlohmann::json j;
  j["method"] = to_string(a.method);
  j["K"] = a.k;
  j["clusters"] = a.members();
  j["codes"] = a.codes;  // original order, so a round trip is exact
  return j.dump(2);
}

ClusterAssignment assignment_from_json(const std::string& text) {
  try {
    auto j = nlohmann::json::parse(text);
    ClusterAssignment a;
    a.method = parse_method(j.at("method").get<std::string>());
    a.k = j.at("K").get<std::size_t>();
    const auto clusters = j.at("clusters").get<std::vector<std::vector<std::string>>>();
    if (clusters.size() != a.k) fail(ErrorKind::kParse, "assignment JSON: K does not match clusters");
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      for (const auto& code : clusters[c]) {
        a.codes.push_back(code);
        a.cluster.push_back(c);
      }
    }
    a.validate();
    if (j.contains("codes")) {
      const auto order = j.at("codes").get<std::vector<std::string>>();
      if (order.size() != a.codes.size()) fail(ErrorKind::kParse, "assignment JSON: codes do not match clusters");
      ClusterAssignment ordered{a.method, a.k, {}, {}};
      for (const auto& code : order) {
        ordered.codes.push_back(code);
        ordered.cluster.push_back(a.cluster_of(code));
      }
      ordered.validate();
      return ordered;
    }
    return a;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kParse, std::string("assignment JSON: ") + e.what());
  }
}

}  // namespace langclust
