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


#include "langclust/reference.hpp"

#include <algorithm>

#include "langclust/error.hpp"

namespace langclust {
namespace {

const std::vector<std::string> kCodes = {"ar", "bg", "cs", "de", "el", "es", "fa", "fr",
                                         "he", "hu", "it", "ja", "nl", "pl", "pt", "ro",
                                         "ru", "sk", "sl", "th", "tr", "vi", "zh"};

}  // namespace

std::vector<std::string> published_codes() { return kCodes; }

const std::vector<PublishedTable>& published_tables() {
  static const std::vector<PublishedTable> tables = {
      {"many_to_one_methods",
       "23 languages to English, by clustering method",
       kCodes,
       {{"Random", {22.90, 32.18, 28.88, 30.67, 33.28, 28.47, 19.16, 24.36, 28.01, 20.78, 26.08, 10.13,
                    33.88, 18.34, 31.93, 27.64, 17.38, 24.22, 15.88, 17.94, 18.93, 25.93, 14.08}},
        {"Family", {25.02, 32.75, 30.27, 31.09, 33.61, 28.18, 19.59, 24.24, 29.42, 19.07, 26.74, 9.90,
                    34.82, 19.23, 32.18, 27.91, 17.58, 25.89, 23.97, 18.46, 19.95, 26.95, 15.13}},
        {"Embedding", {25.27, 32.52, 30.97, 31.33, 33.67, 28.81, 19.64, 25.43, 30.03, 21.89, 27.10, 11.57,
                       35.43, 20.04, 32.33, 27.97, 18.13, 26.61, 22.12, 18.46, 22.09, 26.95, 15.13}}}},
      {"many_to_one_counts",
       "23 languages to English, by number of models",
       kCodes,
       {{"Individual", {25.43, 32.87, 29.15, 32.18, 33.70, 29.17, 18.12, 27.98, 29.45, 19.07, 27.70, 9.90,
                        34.61, 18.19, 32.77, 27.88, 17.55, 19.72, 4.48, 18.46, 19.95, 26.95, 15.13}},
        {"Universal", {23.26, 32.47, 28.86, 30.42, 33.56, 28.03, 19.45, 23.64, 27.29, 21.24, 26.07, 12.78,
                       34.58, 19.02, 30.96, 27.77, 16.69, 25.31, 24.22, 18.27, 18.76, 26.13, 14.54}},
        {"Embedding", {25.27, 32.52, 30.97, 31.33, 33.67, 28.81, 19.64, 25.43, 30.03, 21.89, 27.10, 11.57,
                       35.43, 20.04, 32.33, 27.97, 18.13, 26.61, 22.12, 18.46, 22.09, 26.95, 15.13}}}},
      {"one_to_many",
       "English to 23 languages",
       kCodes,
       {{"Universal", {9.80, 25.84, 17.89, 22.40, 26.71, 28.48, 12.26, 22.10, 16.38, 13.32, 25.34, 10.91,
                       26.19, 10.10, 28.27, 19.72, 8.26, 15.52, 15.82, 25.06, 9.44, 26.87, 9.56}},
        {"Individual", {13.13, 30.04, 19.84, 25.69, 27.90, 29.57, 12.03, 22.93, 20.43, 13.74, 26.87, 10.70,
                        29.86, 11.61, 28.09, 21.81, 14.11, 14.47, 6.61, 27.41, 11.40, 28.77, 10.83}},
        {"Family", {13.11, 27.54, 19.11, 23.74, 27.78, 28.88, 13.36, 22.78, 20.26, 13.74, 26.71, 10.70,
                    27.83, 10.97, 28.63, 21.13, 12.80, 16.91, 15.73, 27.41, 11.40, 28.77, 10.83}},
        {"Embedding", {12.37, 28.85, 20.81, 25.27, 27.11, 28.93, 13.79, 22.85, 19.23, 15.47, 26.81, 13.33,
                       29.98, 11.95, 28.83, 21.14, 13.84, 18.18, 14.25, 28.55, 12.11, 29.79, 10.52}}}},
  };
  return tables;
}

std::vector<std::vector<std::string>> published_memberships(std::string_view direction) {
  if (direction == "many_to_one") {
    return {{"vi"}, {"th"}, {"zh"}, {"ja", "tr", "hu"}, {"he", "ar", "fa"},
            {"ru", "el", "sk", "sl", "bg", "cs", "pl"},
            {"de", "nl", "ro", "it", "fr", "es", "pt"}};
  }
  if (direction == "one_to_many") {
    return {{"ro", "fr", "it", "es", "pt"}, {"de", "nl"},
            {"sl", "bg", "el", "ru", "sk", "cs", "pl"}, {"tr", "hu", "zh", "ja"},
            {"vi", "th", "he", "ar", "fa"}};
  }
  fail(ErrorKind::kInput, "unknown direction '" + std::string(direction) + "'");
}

Dendrogram published_dendrogram(std::string_view direction) {
  const auto memberships = published_memberships(direction);
  const std::size_t n = kCodes.size();
  std::vector<std::size_t> cluster(n);
  for (std::size_t c = 0; c < memberships.size(); ++c) {
    for (const auto& code : memberships[c]) {
      const auto it = std::find(kCodes.begin(), kCodes.end(), code);
      cluster[static_cast<std::size_t>(it - kCodes.begin())] = c;
    }
  }
  DistanceMatrix d{n, std::vector<double>(n * n, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) d.values[i * n + j] = cluster[i] == cluster[j] ? 0.2 : 1.0;
    }
  }
  return agglomerate(d, kCodes, Linkage::kAverage);
}

}  // namespace langclust
