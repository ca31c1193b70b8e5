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


#include "langclust/langclust.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "langclust/bleu.hpp"
#include "langclust/cluster.hpp"
#include "langclust/error.hpp"
#include "langclust/experiment.hpp"
#include "langclust/log.hpp"
#include "langclust/render.hpp"
#include "langclust/synth.hpp"

struct lc_experiment {
  std::unique_ptr<langclust::Experiment> impl;
};

namespace {

namespace fs = std::filesystem;
using langclust::ErrorKind;

thread_local std::string t_last_error;

struct NullArgument : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

lc_status status_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kDimension: return LC_ERR_DIMENSION;
    case ErrorKind::kIndex: return LC_ERR_INDEX;
    case ErrorKind::kDomain: return LC_ERR_DOMAIN;
    case ErrorKind::kInput: return LC_ERR_INPUT;
    case ErrorKind::kParse: return LC_ERR_PARSE;
    case ErrorKind::kLookup: return LC_ERR_LOOKUP;
    case ErrorKind::kCoverage: return LC_ERR_COVERAGE;
    case ErrorKind::kIo: return LC_ERR_IO;
    case ErrorKind::kDivergence: return LC_ERR_DIVERGENCE;
  }
  return LC_ERR_INTERNAL;
}

template <typename F>
lc_status guarded(F&& body) {
  try {
    body();
    t_last_error.clear();
    return LC_OK;
  } catch (const langclust::Error& e) {
    t_last_error = e.what();
    return status_of(e.kind());
  } catch (const NullArgument& e) {
    t_last_error = e.what();
    return LC_ERR_NULL_ARGUMENT;
  } catch (const fs::filesystem_error& e) {
    t_last_error = e.what();
    return LC_ERR_IO;
  } catch (const std::exception& e) {
    t_last_error = e.what();
    return LC_ERR_INTERNAL;
  } catch (...) {
    t_last_error = "unknown error";
    return LC_ERR_INTERNAL;
  }
}

lc_status null_argument() {
  t_last_error = "a required argument is NULL";
  return LC_ERR_NULL_ARGUMENT;
}

void require(const void* p, const char* name) {
  if (p == nullptr) throw NullArgument(std::string(name) + " is NULL");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void set_out(char** out, const std::string& s) {
  if (out != nullptr) *out = dup_string(s);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) langclust::fail(ErrorKind::kIo, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) langclust::fail(ErrorKind::kIo, "cannot read " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

void write_file(const std::string& path, const std::string& text) {
  const auto parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) langclust::fail(ErrorKind::kIo, "cannot write " + path);
  out << text;
}

std::string find_beside(const std::string& checkpoint, const char* name) {
  const auto dir = fs::path(checkpoint).parent_path();
  for (const auto& candidate : {dir / name, dir.parent_path() / name}) {
    if (fs::exists(candidate)) return candidate.string();
  }
  langclust::fail(ErrorKind::kIo, std::string("cannot find ") + name + " near " + checkpoint);
}

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

langclust::Dendrogram dendrogram_from_input(const std::string& input) {
  const std::string text = read_file(input);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return langclust::dendrogram_from_json(text);
  return langclust::agglomerative_cluster(langclust::load_embeddings_tsv(input));
}

std::string system_name(const std::string& s) {
  std::string lower;
  for (char c : s) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  for (const auto& name : langclust::kSystems) {
    std::string n;
    for (char c : name) n += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (n == lower) return name;
  }
  langclust::fail(ErrorKind::kInput, "unknown system '" + s + "'");
}

}  // namespace

extern "C" {

const char* lc_last_error(void) { return t_last_error.c_str(); }

const char* lc_status_name(lc_status status) {
  switch (status) {
    case LC_OK: return "ok";
    case LC_ERR_DIMENSION: return "dimension error";
    case LC_ERR_INDEX: return "index error";
    case LC_ERR_DOMAIN: return "domain error";
    case LC_ERR_INPUT: return "input error";
    case LC_ERR_PARSE: return "parse error";
    case LC_ERR_LOOKUP: return "lookup error";
    case LC_ERR_COVERAGE: return "coverage error";
    case LC_ERR_IO: return "I/O error";
    case LC_ERR_DIVERGENCE: return "divergence";
    case LC_ERR_NULL_ARGUMENT: return "null argument";
    case LC_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void lc_string_free(char* s) { std::free(s); }

void lc_set_log_level(int level) {
  langclust::set_log_level(level <= 0   ? langclust::LogLevel::kQuiet
                           : level == 1 ? langclust::LogLevel::kWarning
                                        : langclust::LogLevel::kInfo);
}

lc_status lc_learn_bpe(const char* const* corpus_paths, size_t n_paths, size_t num_merges,
                       const char* merges_out) {
  if (corpus_paths == nullptr || merges_out == nullptr) return null_argument();
  return guarded([&] {
    std::vector<std::vector<std::string>> corpora;
    for (size_t i = 0; i < n_paths; ++i) {
      require(corpus_paths[i], "corpus path");
      std::vector<std::string> lines;
      for (const auto& line : read_lines(corpus_paths[i])) {
        const auto tab = line.find('\t');
        lines.push_back(line.substr(0, tab));
        if (tab != std::string::npos) lines.push_back(line.substr(tab + 1));
      }
      corpora.push_back(std::move(lines));
    }
    langclust::save_merges(langclust::learn_bpe(corpora, num_merges), merges_out);
  });
}

lc_status lc_encode(const char* merges_path, const char* input_path, const char* output_path) {
  if (merges_path == nullptr || input_path == nullptr || output_path == nullptr) {
    return null_argument();
  }
  return guarded([&] {
    const langclust::BpeCodec codec(langclust::load_merges(merges_path));
    std::string out;
    for (const auto& line : read_lines(input_path)) {
      std::stringstream fields(line);
      std::string field;
      bool first_field = true;
      while (std::getline(fields, field, '\t')) {
        if (!first_field) out += '\t';
        first_field = false;
        bool first = true;
        for (const auto& sym : codec.segment_line(field)) {
          if (!first) out += ' ';
          first = false;
          out += sym;
        }
      }
      out += '\n';
    }
    write_file(output_path, out);
  });
}

lc_status lc_synth(uint64_t seed, const char* out_dir, char** summary_json) {
  if (out_dir == nullptr) return null_argument();
  return guarded([&] {
    langclust::SynthConfig config;
    config.seed = seed;
    const auto harness = langclust::build_synthetic_harness(config);
    const auto files = langclust::write_synthetic_harness(harness, out_dir);
    nlohmann::json j{{"train_manifest", files.train_manifest}, {"dev_manifest", files.dev_manifest},
                     {"test_manifest", files.test_manifest},   {"taxonomy", files.taxonomy},
                     {"planted", files.planted},               {"languages", harness.codes()},
                     {"sentences", harness.pivot.size()}};
    set_out(summary_json, j.dump(2));
  });
}

lc_status lc_experiment_open(const char* config_path, lc_experiment** out) {
  if (config_path == nullptr || out == nullptr) return null_argument();
  *out = nullptr;
  return guarded([&] {
    auto exp = std::make_unique<lc_experiment>();
    exp->impl = std::make_unique<langclust::Experiment>(langclust::ExperimentConfig::load(config_path));
    *out = exp.release();
  });
}

void lc_experiment_close(lc_experiment* exp) { delete exp; }

lc_status lc_experiment_run_dir(const lc_experiment* exp, char** out) {
  if (exp == nullptr || out == nullptr) return null_argument();
  return guarded([&] { set_out(out, exp->impl->run_dir()); });
}

lc_status lc_experiment_train_universal(lc_experiment* exp) {
  if (exp == nullptr) return null_argument();
  return guarded([&] { exp->impl->run_universal(); });
}

lc_status lc_experiment_extract_embeddings(lc_experiment* exp, const char* checkpoint,
                                           const char* out_tsv, char** written) {
  if (exp == nullptr) return null_argument();
  return guarded([&] {
    auto& e = *exp->impl;
    if (checkpoint == nullptr && out_tsv == nullptr) {
      if (e.manifest().embeddings.empty()) e.run_universal();
      set_out(written, e.artifact(e.manifest().embeddings));
      return;
    }
    std::string ckpt = checkpoint != nullptr ? checkpoint : "";
    if (ckpt.empty()) {
      if (e.manifest().universal_checkpoint.empty()) {
        langclust::fail(ErrorKind::kInput, "no universal checkpoint yet: run train-universal first");
      }
      ckpt = e.artifact(e.manifest().universal_checkpoint);
    }
    const std::string out = out_tsv != nullptr ? out_tsv : e.artifact("universal/embeddings.export.tsv");
    e.export_embeddings(ckpt, out);
    set_out(written, out);
  });
}

lc_status lc_experiment_cluster(lc_experiment* exp, const char* method, size_t k, int has_seed,
                                uint64_t seed, const char* taxonomy, char** assignment_json) {
  if (exp == nullptr || method == nullptr) return null_argument();
  return guarded([&] {
    const auto m = langclust::parse_method(method);
    const auto a = exp->impl->run_clustering(
        m, k == 0 ? std::nullopt : std::optional<std::size_t>(k),
        has_seed != 0 ? std::optional<std::uint64_t>(seed) : std::nullopt,
        taxonomy != nullptr ? taxonomy : "");
    set_out(assignment_json, langclust::assignment_to_json(a));
  });
}

lc_status lc_experiment_train_clusters(lc_experiment* exp, const char* system) {
  if (exp == nullptr || system == nullptr) return null_argument();
  return guarded([&] {
    auto& e = *exp->impl;
    const std::string name = system_name(system);
    if (name == "Universal") {
      e.run_universal();
      return;
    }
    if (name == "Individual") e.define_system(name);
    if (!e.manifest().systems.count(name)) {
      if (name == "Random") {
        const auto n = e.config().random_seeds;
        for (std::size_t r = 0; r < n; ++r) {
          e.run_clustering(langclust::ClusterMethod::kRandom, std::nullopt,
                           langclust::derive_seed(e.config().seed, "random:" + std::to_string(r)));
        }
      } else {
        e.run_clustering(langclust::parse_method(name == "Family" ? "family" : "embedding"));
      }
    }
    e.run_cluster_training(name);
  });
}

lc_status lc_experiment_train_assignment(lc_experiment* exp, const char* assignment_path) {
  if (exp == nullptr || assignment_path == nullptr) return null_argument();
  return guarded([&] {
    exp->impl->run_cluster_training(langclust::assignment_from_json(read_file(assignment_path)));
  });
}

lc_status lc_experiment_evaluate(lc_experiment* exp, const char* split, char** table) {
  if (exp == nullptr) return null_argument();
  return guarded([&] {
    const auto t = exp->impl->run_evaluation(split != nullptr ? split : exp->impl->config().eval_split);
    set_out(table, t.to_markdown());
  });
}

lc_status lc_experiment_report(lc_experiment* exp, char** report) {
  if (exp == nullptr || report == nullptr) return null_argument();
  return guarded([&] { set_out(report, exp->impl->report()); });
}

lc_status lc_experiment_dendrogram(lc_experiment* exp, const char* format, size_t k, char** text) {
  if (exp == nullptr || format == nullptr || text == nullptr) return null_argument();
  return guarded([&] {
    const auto fmt = langclust::parse_dendrogram_format(format);
    std::optional<std::size_t> cut;
    if (k != 0) {
      cut = k;
    } else if (const auto it = exp->impl->manifest().systems.find("Embedding");
               it != exp->impl->manifest().systems.end() && !it->second.empty()) {
      cut = it->second.front().assignment.k;
    }
    set_out(text, langclust::render_dendrogram(exp->impl->dendrogram(), fmt, cut));
  });
}

lc_status lc_extract_embeddings(const char* checkpoint, const char* out_tsv) {
  if (checkpoint == nullptr || out_tsv == nullptr) return null_argument();
  return guarded([&] {
    const auto model = langclust::TransformerModel::load(checkpoint);
    langclust::save_embeddings_tsv(model.extract_language_embeddings(), out_tsv);
  });
}

lc_status lc_cluster(const char* method, const char* embeddings_tsv, const char* codes_csv,
                     size_t k, size_t k_max, uint64_t seed, const char* taxonomy,
                     char** assignment_json) {
  if (method == nullptr || assignment_json == nullptr) return null_argument();
  return guarded([&] {
    using langclust::ClusterMethod;
    const auto m = langclust::parse_method(method);
    langclust::ClusterAssignment a;
    if (m == ClusterMethod::kEmbedding) {
      require(embeddings_tsv, "embeddings_tsv");
      const auto embeds = langclust::load_embeddings_tsv(embeddings_tsv);
      const auto d = langclust::agglomerative_cluster(embeds);
      std::size_t chosen = k;
      if (chosen == 0) {
        const std::size_t km = k_max != 0 ? k_max : embeds.count() - 1;
        chosen = langclust::elbow_optimal_k(embeds, d, km).k;
      }
      a = langclust::cut_dendrogram(d, chosen);
    } else {
      std::vector<std::string> codes;
      if (codes_csv != nullptr) {
        codes = split_csv(codes_csv);
      } else {
        require(embeddings_tsv, "codes_csv or embeddings_tsv");
        codes = langclust::load_embeddings_tsv(embeddings_tsv).codes;
      }
      if (m == ClusterMethod::kFamily) {
        a = langclust::cluster_by_family(codes, taxonomy != nullptr
                                                    ? langclust::TaxonomyTable::load(taxonomy)
                                                    : langclust::TaxonomyTable::builtin());
      } else {
        if (k == 0) langclust::fail(ErrorKind::kInput, "random clustering needs K");
        a = langclust::random_clusters(codes, k, seed);
      }
    }
    set_out(assignment_json, langclust::assignment_to_json(a));
  });
}

lc_status lc_dendrogram(const char* input, const char* format, size_t k, char** text) {
  if (input == nullptr || format == nullptr || text == nullptr) return null_argument();
  return guarded([&] {
    const auto fmt = langclust::parse_dendrogram_format(format);
    set_out(text, langclust::render_dendrogram(dendrogram_from_input(input), fmt,
                                               k == 0 ? std::nullopt : std::optional<std::size_t>(k)));
  });
}

lc_status lc_translate(const char* checkpoint, const char* vocab_path, const char* merges_path,
                       const char* lang, const char* input_path, const char* output_path,
                       size_t beam_size, double alpha, size_t max_decode_len) {
  if (checkpoint == nullptr || lang == nullptr || input_path == nullptr || output_path == nullptr) {
    return null_argument();
  }
  return guarded([&] {
    const auto model = langclust::TransformerModel::load(checkpoint);
    const auto vocab = langclust::Vocabulary::load(
        vocab_path != nullptr ? vocab_path : find_beside(checkpoint, "vocab.tsv"));
    const langclust::BpeCodec codec(langclust::load_merges(
        merges_path != nullptr ? merges_path : find_beside(checkpoint, "bpe.merges")));
    langclust::BeamConfig beam{beam_size, alpha, max_decode_len};
    beam.validate();
    std::vector<std::string> sources;
    for (auto& line : read_lines(input_path)) sources.push_back(line.substr(0, line.find('\t')));
    std::string out;
    for (const auto& h : langclust::translate_lines(model, vocab, codec, lang, sources, beam)) {
      out += h + "\n";
    }
    write_file(output_path, out);
  });
}

lc_status lc_bleu(const char* hypothesis_path, const char* reference_path, char** summary,
                  char** report_json) {
  if (hypothesis_path == nullptr || reference_path == nullptr) return null_argument();
  return guarded([&] {
    const auto report =
        langclust::corpus_bleu_text(read_lines(hypothesis_path), read_lines(reference_path));
    set_out(summary, report.summary());
    set_out(report_json, report.to_json());
  });
}

}  // extern "C"
