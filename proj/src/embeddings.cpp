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

#include "langclust/embeddings.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "langclust/error.hpp"

namespace langclust {

std::vector<double> LanguageEmbeddingSet::row(std::size_t i) const {
  const std::size_t d = dim();
  if (i >= codes.size()) fail(ErrorKind::kIndex, "embedding row out of range");
  return {matrix.raw() + i * d, matrix.raw() + (i + 1) * d};
}

void LanguageEmbeddingSet::validate() const {
  std::set<std::string> seen;
  for (const auto& c : codes) {
    if (!seen.insert(c).second) fail(ErrorKind::kInput, "duplicate language code " + c);
  }
  if (matrix.rank() != 2 || matrix.dim(0) != codes.size()) {
    fail(ErrorKind::kDimension, "embedding matrix " + shape_string(matrix.shape()) +
                                    " does not match " + std::to_string(codes.size()) +
                                    " codes");
  }
}

std::string embeddings_tsv(const LanguageEmbeddingSet& set) {
  std::string out;
  char buf[64];
  for (std::size_t i = 0; i < set.count(); ++i) {
    out += set.codes[i];
    for (std::size_t j = 0; j < set.dim(); ++j) {
      auto [end, ec] = std::to_chars(buf, buf + sizeof buf, set.matrix[i * set.dim() + j]);
      out.push_back('\t');
      out.append(buf, end);
    }
    out.push_back('\n');
  }
  return out;
}

void save_embeddings_tsv(const LanguageEmbeddingSet& set, const std::string& path) {
  set.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path);
  out << embeddings_tsv(set);
}

LanguageEmbeddingSet load_embeddings_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot read " + path);
  LanguageEmbeddingSet set;
  std::vector<double> values;
  std::size_t dim = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, '\t')) fields.push_back(f);
    if (fields.size() < 2) {
      fail(ErrorKind::kParse, path + ":" + std::to_string(lineno) + ": expected code and values");
    }
    if (dim == 0) dim = fields.size() - 1;
    if (fields.size() - 1 != dim) {
      fail(ErrorKind::kParse, path + ":" + std::to_string(lineno) + ": inconsistent dimension");
    }
    set.codes.push_back(fields[0]);
    for (std::size_t j = 1; j < fields.size(); ++j) {
      double v = 0.0;
      const auto& s = fields[j];
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || ptr != s.data() + s.size()) {
        fail(ErrorKind::kParse, path + ":" + std::to_string(lineno) + ": bad number '" + s + "'");
      }
      values.push_back(v);
    }
  }
  set.matrix = Tensor({set.codes.size(), dim}, std::move(values));
  set.validate();
  return set;
}

}  // namespace langclust
