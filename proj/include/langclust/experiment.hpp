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
#include <string>
#include <vector>

#include "langclust/bleu.hpp"
#include "langclust/cluster.hpp"
#include "langclust/data.hpp"
#include "langclust/model.hpp"
#include "langclust/subword.hpp"
#include "langclust/train.hpp"

namespace langclust {

enum class TranslationDirection { kManyToOne, kOneToMany };

const char* to_string(TranslationDirection d);

/// Flat "key = value" file; '#' starts a comment line. Relative paths are
/// resolved against the config file's directory.
struct ExperimentConfig {
  TranslationDirection direction = TranslationDirection::kManyToOne;
  std::string train_manifest;
  std::string dev_manifest;
  std::string test_manifest;
  std::string taxonomy;  // empty: built-in 23-language table
  ModelConfig model;     // vocab_size is filled from the learned vocabulary
  std::size_t num_merges = 4000;
  std::size_t tokens_per_lang = 512;
  std::size_t steps = 3000;
  std::uint64_t warmup_steps = 4000;
  double lr_scale = 1.0;
  double clip_norm = 5.0;
  std::size_t chunk_tokens = 1024;
  std::uint64_t seed = 1;
  ClusterMethod method = ClusterMethod::kEmbedding;
  std::size_t k_override = 0;  // 0: elbow
  std::size_t k_max = 0;       // 0: number of languages - 1
  Linkage linkage = Linkage::kAverage;
  Metric metric = Metric::kCosine;
  double data_fraction = 1.0;
  std::size_t random_seeds = 3;
  std::vector<double> late_checkpoints = {0.8, 0.9};  // fractions of `steps`
  BeamConfig beam;
  std::string eval_split = "test";
  std::string run_root = "runs";  // not part of the hash

  static ExperimentConfig parse(const std::string& text, const std::string& base_dir = ".");
  static ExperimentConfig load(const std::string& path);
  /// Sorted "key = value" lines; parse(canonical()) reproduces the config.
  std::string canonical() const;
  /// 16 hex digits over the canonical settings and the contents of every
  /// referenced file (paths themselves do not matter).
  std::string hash() const;
  void validate() const;
  /// Steps at which late checkpoints are taken, ascending, all below `steps`.
  std::vector<std::size_t> late_steps() const;
};

/// One trained system of a given clustering: the assignment plus the seed
/// that produced it (random clustering) or 0.
struct SystemRun {
  ClusterAssignment assignment;
  std::uint64_t seed = 0;
};

/// BLEU of one language under one system run, with its provenance.
struct ScoredCell {
  BleuReport report;
  std::string checkpoint;  // relative to the run directory
  std::string test_file;
  std::string hypotheses;  // relative to the run directory
};

struct RunManifest {
  std::string config_hash;
  std::string universal_checkpoint;
  std::vector<std::string> late_checkpoints;
  std::string embeddings;
  std::vector<std::string> late_embeddings;
  std::map<std::string, std::vector<SystemRun>> systems;          // "Embedding" -> runs
  std::map<std::string, std::string> checkpoints;                 // model key -> file
  std::map<std::string, std::map<std::string, std::vector<ScoredCell>>> scores;  // system -> lang -> per run

  std::string to_json() const;
  static RunManifest from_json(const std::string& text);
};

/// Language x system BLEU; random-style systems hold the mean over runs.
struct ComparisonTable {
  std::vector<std::string> languages;
  std::vector<std::string> systems;
  std::map<std::string, std::map<std::string, double>> cells;  // system -> lang -> BLEU

  std::optional<double> cell(const std::string& system, const std::string& lang) const;
  /// Mean over the languages present for `system`.
  std::optional<double> mean(const std::string& system) const;
  /// Markdown table; the best system per language is starred and absent
  /// cells read "missing".
  std::string to_markdown() const;
};

inline const std::vector<std::string> kSystems = {"Universal", "Individual", "Family", "Embedding",
                                                  "Random"};

/// One experiment rooted at `<run_root>/<config hash>/`. Every stage stores
/// its artifacts there and records them in manifest.json, so stages can run
/// in separate processes and finished work is reused.
class Experiment {
 public:
  explicit Experiment(ExperimentConfig config);

  const ExperimentConfig& config() const noexcept { return config_; }
  const std::string& hash() const noexcept { return hash_; }
  const std::string& run_dir() const noexcept { return run_dir_; }
  std::string artifact(const std::string& relative) const;
  const RunManifest& manifest() const noexcept { return manifest_; }

  /// Sorted language codes of the training manifest.
  const std::vector<std::string>& languages();
  /// Joint BPE over all training text, cached as bpe.merges.
  const BpeCodec& codec();
  /// Shared vocabulary with one tag per language, cached as vocab.tsv.
  const Vocabulary& vocabulary();
  /// Encoded corpora of one split ("train", "dev", "test") for `codes`, in
  /// translation direction. Training data is subsampled by data_fraction.
  std::vector<ParallelCorpus> load_split(const std::string& split,
                                         const std::vector<std::string>& codes);

  /// Trains the model for one cluster unless its checkpoint exists; returns
  /// the checkpoint path. The seed depends only on the config seed and the
  /// cluster's languages, so a one-cluster run is the universal model.
  std::string train_cluster(const std::vector<std::string>& codes,
                            const std::vector<std::size_t>& checkpoint_steps = {},
                            const CheckpointFn& on_checkpoint = {});
  std::string model_key(const std::vector<std::string>& codes) const;

  /// Universal model with embedding exports at the late checkpoints and at
  /// the final step.
  void run_universal();
  LanguageEmbeddingSet embeddings() const;
  LanguageEmbeddingSet export_embeddings(const std::string& checkpoint, const std::string& out_tsv);

  /// Clusters the languages and records the run under its system name.
  /// Embedding clustering also writes dendrogram.json.
  ClusterAssignment run_clustering(ClusterMethod method, std::optional<std::size_t> k = std::nullopt,
                                   std::optional<std::uint64_t> seed = std::nullopt,
                                   const std::string& taxonomy_path = {});
  /// Records the K=1 or K=n partition as a system.
  ClusterAssignment define_system(const std::string& system);
  Dendrogram dendrogram() const;

  /// Trains one model per cluster of every run recorded for `system`.
  void run_cluster_training(const std::string& system);
  void run_cluster_training(const ClusterAssignment& assignment);

  /// Decodes `split` for every recorded system with the configured beam and
  /// scores it. Systems without checkpoints stay missing.
  ComparisonTable run_evaluation(const std::string& split);
  ComparisonTable comparison() const;
  /// Text report: run summary, comparison table and the published reference
  /// numbers, labeled as not reproduced.
  std::string report();

  void save_manifest() const;

 private:
  std::vector<std::string> translate_cached(const std::string& key, const std::string& code,
                                            const std::string& split, const std::string& checkpoint);
  std::string manifest_file(const std::string& split) const;
  std::vector<ManifestEntry> manifest_entries(const std::string& split) const;

  ExperimentConfig config_;
  std::string hash_;
  std::string run_dir_;
  RunManifest manifest_;
  std::vector<std::string> languages_;
  std::optional<BpeCodec> codec_;
  std::optional<Vocabulary> vocab_;
};

/// Decodes raw source lines with a checkpoint. Output ids below the
/// vocabulary's reserved range (specials and language tags) are never emitted.
std::vector<std::string> translate_lines(const TransformerModel& model, const Vocabulary& vocab,
                                         const BpeCodec& codec, const std::string& lang,
                                         const std::vector<std::string>& sources,
                                         const BeamConfig& beam);

}  // namespace langclust
