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

#include "langclust/tensor.hpp"

namespace langclust {

/// One embedding row per language, rows ordered as `codes`.
struct LanguageEmbeddingSet {
  std::vector<std::string> codes;
  Tensor matrix;  // [codes.size(), dim]

  std::size_t count() const noexcept { return codes.size(); }
  std::size_t dim() const { return matrix.rank() == 2 ? matrix.dim(1) : 0; }
  std::vector<double> row(std::size_t i) const;

  /// Checks for duplicate codes and a consistent matrix shape.
  void validate() const;
  friend bool operator==(const LanguageEmbeddingSet&, const LanguageEmbeddingSet&) = default;
};

/// "code<TAB>v1<TAB>...<TAB>vd" per line; values written round-trip exact.
void save_embeddings_tsv(const LanguageEmbeddingSet& set, const std::string& path);
LanguageEmbeddingSet load_embeddings_tsv(const std::string& path);
std::string embeddings_tsv(const LanguageEmbeddingSet& set);

}  // namespace langclust
