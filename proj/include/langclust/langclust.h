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


/* C interface to langclust. Every call returns an lc_status; on failure
 * lc_last_error() holds a message for the calling thread. Strings returned
 * through char** out-parameters are owned by the caller and released with
 * lc_string_free(). */

#ifndef LANGCLUST_LANGCLUST_H_
#define LANGCLUST_LANGCLUST_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define LC_API __declspec(dllexport)
#else
#define LC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lc_status {
  LC_OK = 0,
  LC_ERR_DIMENSION = 1,
  LC_ERR_INDEX = 2,
  LC_ERR_DOMAIN = 3,
  LC_ERR_INPUT = 4,
  LC_ERR_PARSE = 5,
  LC_ERR_LOOKUP = 6,
  LC_ERR_COVERAGE = 7,
  LC_ERR_IO = 8,
  LC_ERR_DIVERGENCE = 9,
  LC_ERR_NULL_ARGUMENT = 10,
  LC_ERR_INTERNAL = 11
} lc_status;

typedef struct lc_experiment lc_experiment;

LC_API const char* lc_last_error(void);
LC_API const char* lc_status_name(lc_status status);
LC_API void lc_string_free(char* s);
/* 0 quiet, 1 warnings, 2 progress. */
LC_API void lc_set_log_level(int level);

/* Subwords. learn_bpe reads "source<TAB>target" files and pools both sides. */
LC_API lc_status lc_learn_bpe(const char* const* corpus_paths, size_t n_paths, size_t num_merges,
                              const char* merges_out);
/* Segments every whitespace token of every line (tabs preserved). */
LC_API lc_status lc_encode(const char* merges_path, const char* input_path,
                           const char* output_path);

/* Synthetic six-language harness. *summary_json lists the written files. */
LC_API lc_status lc_synth(uint64_t seed, const char* out_dir, char** summary_json);

/* Experiments, rooted at <run_root>/<config hash>/. */
LC_API lc_status lc_experiment_open(const char* config_path, lc_experiment** out);
LC_API void lc_experiment_close(lc_experiment* exp);
LC_API lc_status lc_experiment_run_dir(const lc_experiment* exp, char** out);
LC_API lc_status lc_experiment_train_universal(lc_experiment* exp);
/* checkpoint may be NULL (final universal checkpoint); out_tsv may be NULL
 * (the run's embeddings.tsv). *written receives the TSV path. */
LC_API lc_status lc_experiment_extract_embeddings(lc_experiment* exp, const char* checkpoint,
                                                  const char* out_tsv, char** written);
/* method: "embedding", "family" or "random". k = 0 picks K automatically.
 * taxonomy may be NULL. *assignment_json receives {method, K, clusters}. */
LC_API lc_status lc_experiment_cluster(lc_experiment* exp, const char* method, size_t k,
                                       int has_seed, uint64_t seed, const char* taxonomy,
                                       char** assignment_json);
/* system: "Universal", "Individual", "Family", "Embedding" or "Random". */
LC_API lc_status lc_experiment_train_clusters(lc_experiment* exp, const char* system);
LC_API lc_status lc_experiment_train_assignment(lc_experiment* exp, const char* assignment_path);
/* split may be NULL (config's eval_split). *table receives markdown. */
LC_API lc_status lc_experiment_evaluate(lc_experiment* exp, const char* split, char** table);
LC_API lc_status lc_experiment_report(lc_experiment* exp, char** report);
/* format: "json", "dot" or "svg"; k = 0 draws no cut. */
LC_API lc_status lc_experiment_dendrogram(lc_experiment* exp, const char* format, size_t k,
                                          char** text);

/* Standalone operations on files. */
LC_API lc_status lc_extract_embeddings(const char* checkpoint, const char* out_tsv);
/* Clusters either an embedding TSV (method "embedding") or a comma-separated
 * code list (methods "family", "random"). k = 0: elbow (embedding) or the
 * number of families. k_max = 0: languages - 1. */
LC_API lc_status lc_cluster(const char* method, const char* embeddings_tsv, const char* codes_csv,
                            size_t k, size_t k_max, uint64_t seed, const char* taxonomy,
                            char** assignment_json);
/* input: an embedding TSV or a dendrogram JSON file. */
LC_API lc_status lc_dendrogram(const char* input, const char* format, size_t k, char** text);
/* vocab_path and merges_path may be NULL: vocab.tsv and bpe.merges are then
 * looked up next to the checkpoint and in its parent directory. */
LC_API lc_status lc_translate(const char* checkpoint, const char* vocab_path,
                              const char* merges_path, const char* lang, const char* input_path,
                              const char* output_path, size_t beam_size, double alpha,
                              size_t max_decode_len);
/* One line per sentence in each file. */
LC_API lc_status lc_bleu(const char* hypothesis_path, const char* reference_path, char** summary,
                         char** report_json);

#ifdef __cplusplus
}
#endif

#endif /* LANGCLUST_LANGCLUST_H_ */
