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

#include <optional>
#include <string>
#include <vector>

#include "langclust/cluster.hpp"

namespace langclust {

enum class DendrogramFormat { kJson, kDot, kSvg };

DendrogramFormat parse_dendrogram_format(std::string_view text);

/// Leaves left to right as drawn: depth-first from the root, first child first.
std::vector<std::size_t> leaf_order(const Dendrogram& d);

/// Deterministic rendering. With `cut_k`, links and labels inside each of
/// the K clusters share a color and links above the cut are gray. JSON
/// output ignores the cut so it round-trips to the same Dendrogram.
std::string render_dendrogram(const Dendrogram& d, DendrogramFormat format,
                              std::optional<std::size_t> cut_k = std::nullopt);

}  // namespace langclust
