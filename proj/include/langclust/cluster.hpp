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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "langclust/embeddings.hpp"

namespace langclust {

enum class Metric { kCosine, kEuclidean };
enum class Linkage { kAverage, kSingle, kComplete };
enum class ClusterMethod { kEmbedding, kFamily, kRandom };

const char* to_string(Metric m);
const char* to_string(Linkage l);
const char* to_string(ClusterMethod m);
Metric parse_metric(std::string_view text);
Linkage parse_linkage(std::string_view text);
ClusterMethod parse_method(std::string_view text);

/// 1 - cos(u, v), in [0, 2]. Zero vectors are a domain error.
double cosine_distance(std::span<const double> u, std::span<const double> v);
double euclidean_distance(std::span<const double> u, std::span<const double> v);

/// Symmetric n x n matrix, row-major.
struct DistanceMatrix {
  std::size_t n = 0;
  std::vector<double> values;

  double operator()(std::size_t i, std::size_t j) const { return values[i * n + j]; }
};

DistanceMatrix pairwise_distances(const LanguageEmbeddingSet& embeds, Metric metric);

/// Leaves are 0..n-1; merge i creates node n+i.
struct Merge {
  std::size_t a = 0;
  std::size_t b = 0;
  double height = 0.0;
  std::size_t node = 0;
  friend bool operator==(const Merge&, const Merge&) = default;
};

struct Dendrogram {
  std::vector<std::string> labels;
  std::vector<Merge> merges;

  std::size_t leaves() const noexcept { return labels.size(); }
  /// Checks the full-binary-tree structure.
  void validate() const;
  friend bool operator==(const Dendrogram&, const Dendrogram&) = default;
};

/// Standard agglomerative procedure on a precomputed distance matrix.
/// Equal distances resolve toward the pair with the lowest
/// (smallest member row of the first cluster, smallest member row of the
/// second cluster).
Dendrogram agglomerate(const DistanceMatrix& distances, std::vector<std::string> labels,
                       Linkage linkage = Linkage::kAverage);

Dendrogram agglomerative_cluster(const LanguageEmbeddingSet& embeds,
                                 Linkage linkage = Linkage::kAverage,
                                 Metric metric = Metric::kCosine);

struct ClusterAssignment {
  ClusterMethod method = ClusterMethod::kEmbedding;
  std::size_t k = 0;
  std::vector<std::string> codes;
  std::vector<std::size_t> cluster;  // cluster index per code

  std::vector<std::vector<std::string>> members() const;
  std::size_t cluster_of(std::string_view code) const;
  /// Every code exactly once, every cluster nonempty.
  void validate() const;
  friend bool operator==(const ClusterAssignment&, const ClusterAssignment&) = default;
};

/// Undo the last K-1 merges. Clusters are numbered by their smallest leaf.
ClusterAssignment cut_dendrogram(const Dendrogram& dendrogram, std::size_t k);

/// Within-cluster sum of squares on L2-normalized rows.
double wcss(const LanguageEmbeddingSet& embeds, const ClusterAssignment& assignment);

/// Knee of a WCSS curve given for k = 1..curve.size(): the interior k with the
/// largest perpendicular distance to the chord between the end points. Ties
/// go to the smaller k.
std::size_t knee_of_curve(std::span<const double> curve);

struct ElbowResult {
  std::size_t k = 0;
  std::vector<double> wcss;  // index k-1
};

ElbowResult elbow_optimal_k(const LanguageEmbeddingSet& embeds, const Dendrogram& dendrogram,
                            std::size_t k_max);

class TaxonomyTable {
 public:
  TaxonomyTable() = default;
  explicit TaxonomyTable(std::map<std::string, std::string> family_of);

  /// The 23-language table with 8 families used by default.
  static TaxonomyTable builtin();
  static TaxonomyTable load(const std::string& path);
  void save(const std::string& path) const;

  std::optional<std::string> family(std::string_view code) const;
  const std::map<std::string, std::string>& entries() const noexcept { return family_of_; }

 private:
  std::map<std::string, std::string> family_of_;  // keys lower-cased
};

ClusterAssignment cluster_by_family(const std::vector<std::string>& codes,
                                    const TaxonomyTable& taxonomy);
ClusterAssignment random_clusters(const std::vector<std::string>& codes, std::size_t k,
                                  std::uint64_t seed);

/// Fraction of code pairs on which both partitions agree.
double rand_index(const ClusterAssignment& a, const ClusterAssignment& b);

std::string dendrogram_to_json(const Dendrogram& d);
Dendrogram dendrogram_from_json(const std::string& text);
std::string assignment_to_json(const ClusterAssignment& a);
ClusterAssignment assignment_from_json(const std::string& text);

}  // namespace langclust
