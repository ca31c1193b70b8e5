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

#include <string>
#include <vector>

#include "langclust/cluster.hpp"

namespace langclust {

/// Published BLEU numbers shipped for side-by-side display only. They come
/// from IWSLT-scale training and are never reproduced or used as test oracles.
struct PublishedTable {
  std::string id;          // "many_to_one_methods", "many_to_one_counts", "one_to_many"
  std::string caption;
  std::vector<std::string> languages;  // lower-case codes
  std::vector<std::pair<std::string, std::vector<double>>> rows;  // system -> BLEU per language
};

const std::vector<PublishedTable>& published_tables();

/// Published embedding-based cluster memberships for the 23 languages,
/// for "many_to_one" (7 clusters) or "one_to_many" (5 clusters).
std::vector<std::vector<std::string>> published_memberships(std::string_view direction);

/// A dendrogram whose K-cut reproduces the published memberships: leaves
/// within a cluster sit at distance 0.2, clusters at distance 1.
Dendrogram published_dendrogram(std::string_view direction);

/// The 23 language codes, sorted.
std::vector<std::string> published_codes();

}  // namespace langclust
