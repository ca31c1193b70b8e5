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


// Command-line front end. Talks to the library only through langclust.h.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "langclust/langclust.h"

namespace {

int report_status(lc_status s) {
  if (s != LC_OK) {
    std::cerr << "error: " << lc_status_name(s) << ": " << lc_last_error() << "\n";
  }
  return static_cast<int>(s);
}

// Owns a string returned by the C API.
struct CString {
  char* p = nullptr;
  ~CString() { lc_string_free(p); }
  std::string str() const { return p != nullptr ? p : ""; }
};

int emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return 0;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot write " << out_path << "\n";
    return static_cast<int>(LC_ERR_IO);
  }
  out << text;
  return 0;
}

// Opens the experiment, runs `body`, closes it.
template <typename F>
int with_experiment(const std::string& config, F&& body) {
  lc_experiment* exp = nullptr;
  if (const auto s = lc_experiment_open(config.c_str(), &exp); s != LC_OK) return report_status(s);
  const int rc = body(exp);
  lc_experiment_close(exp);
  return rc;
}

const char* opt(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Language clustering for multilingual translation"};
  app.require_subcommand(1);
  int verbosity = 1;
  app.add_flag_callback("-v,--verbose", [&] { verbosity = 2; }, "Print progress");
  app.add_flag_callback("-q,--quiet", [&] { verbosity = 0; }, "Print errors only");

  std::string config, out, checkpoint, method, taxonomy, embeddings, codes, system, assignment;
  std::string format = "svg", split, lang, input, output, vocab, merges_path, hyp, ref;
  std::vector<std::string> inputs;
  std::size_t num_merges = 4000, k = 0, k_max = 0, beam = 6, max_len = 64;
  std::optional<std::uint64_t> seed;
  std::uint64_t synth_seed = 1;
  double alpha = 1.1;
  std::function<int()> action;

  auto* learn = app.add_subcommand("learn-bpe", "Learn joint BPE merges from parallel text files");
  learn->add_option("--input", inputs, "source<TAB>target files")->required()->check(CLI::ExistingFile);
  learn->add_option("--merges", num_merges, "Number of merges")->capture_default_str();
  learn->add_option("--out", out, "Merge table to write")->required();
  learn->callback([&] {
    action = [&] {
      std::vector<const char*> paths;
      for (const auto& p : inputs) paths.push_back(p.c_str());
      return report_status(lc_learn_bpe(paths.data(), paths.size(), num_merges, out.c_str()));
    };
  });

  auto* encode = app.add_subcommand("encode", "Segment text with a merge table");
  encode->add_option("--merges", merges_path, "Merge table")->required()->check(CLI::ExistingFile);
  encode->add_option("--input", input, "Text file")->required()->check(CLI::ExistingFile);
  encode->add_option("--output", output, "Segmented output")->required();
  encode->callback([&] {
    action = [&] { return report_status(lc_encode(merges_path.c_str(), input.c_str(), output.c_str())); };
  });

  auto* train_u = app.add_subcommand("train-universal", "Train the universal model and export embeddings");
  train_u->add_option("--config", config, "Experiment config")->required()->check(CLI::ExistingFile);
  train_u->callback([&] {
    action = [&] {
      return with_experiment(config, [&](lc_experiment* e) {
        const int rc = report_status(lc_experiment_train_universal(e));
        CString dir;
        if (rc == 0 && lc_experiment_run_dir(e, &dir.p) == LC_OK) std::cout << dir.str() << "\n";
        return rc;
      });
    };
  });

  auto* extract = app.add_subcommand("extract-embeddings", "Write language embeddings of a checkpoint");
  extract->add_option("--config", config, "Experiment config")->check(CLI::ExistingFile);
  extract->add_option("--checkpoint", checkpoint, "Checkpoint (default: final universal)");
  extract->add_option("--out", out, "Embedding TSV to write");
  extract->callback([&] {
    action = [&] {
      if (config.empty()) {
        if (checkpoint.empty() || out.empty()) {
          std::cerr << "error: without --config, --checkpoint and --out are required\n";
          return static_cast<int>(LC_ERR_INPUT);
        }
        return report_status(lc_extract_embeddings(checkpoint.c_str(), out.c_str()));
      }
      return with_experiment(config, [&](lc_experiment* e) {
        CString written;
        const int rc = report_status(
            lc_experiment_extract_embeddings(e, opt(checkpoint), opt(out), &written.p));
        if (rc == 0) std::cout << written.str() << "\n";
        return rc;
      });
    };
  });

  auto* cluster = app.add_subcommand("cluster", "Cluster languages");
  cluster->add_option("--method", method, "embedding, family or random")
      ->required()
      ->check(CLI::IsMember({"embedding", "family", "random"}));
  cluster->add_option("--k", k, "Number of clusters (default: elbow or families)");
  cluster->add_option("--k-max", k_max, "Largest K tried by the elbow method");
  cluster->add_option("--seed", seed, "Seed for random clustering");
  cluster->add_option("--taxonomy", taxonomy, "lang_code<TAB>family file")->check(CLI::ExistingFile);
  cluster->add_option("--config", config, "Experiment config")->check(CLI::ExistingFile);
  cluster->add_option("--embeddings", embeddings, "Embedding TSV (without --config)")->check(CLI::ExistingFile);
  cluster->add_option("--codes", codes, "Comma-separated codes (without --config)");
  cluster->add_option("--out", out, "Write the assignment JSON here");
  cluster->callback([&] {
    action = [&] {
      CString json;
      int rc = 0;
      if (!config.empty()) {
        rc = with_experiment(config, [&](lc_experiment* e) {
          return report_status(lc_experiment_cluster(e, method.c_str(), k, seed.has_value() ? 1 : 0,
                                                     seed.value_or(0), opt(taxonomy), &json.p));
        });
      } else {
        rc = report_status(lc_cluster(method.c_str(), opt(embeddings), opt(codes), k, k_max,
                                      seed.value_or(1), opt(taxonomy), &json.p));
      }
      return rc != 0 ? rc : emit(json.str() + "\n", out);
    };
  });

  auto* train_c = app.add_subcommand("train-clusters", "Train one model per cluster");
  train_c->add_option("--config", config, "Experiment config")->required()->check(CLI::ExistingFile);
  auto* sys_opt = train_c->add_option("--system", system,
                                      "Universal, Individual, Family, Embedding or Random");
  train_c->add_option("--assignment", assignment, "Assignment JSON to train instead")
      ->check(CLI::ExistingFile)
      ->excludes(sys_opt);
  train_c->callback([&] {
    action = [&] {
      return with_experiment(config, [&](lc_experiment* e) {
        if (!assignment.empty()) return report_status(lc_experiment_train_assignment(e, assignment.c_str()));
        return report_status(lc_experiment_train_clusters(e, system.empty() ? "Embedding" : system.c_str()));
      });
    };
  });

  auto* translate = app.add_subcommand("translate", "Translate a file with beam search");
  translate->add_option("--checkpoint", checkpoint, "Model checkpoint")->required()->check(CLI::ExistingFile);
  translate->add_option("--lang", lang, "Language code of the tag")->required();
  translate->add_option("--input", input, "Source sentences, one per line")->required()->check(CLI::ExistingFile);
  translate->add_option("--output", output, "Translations to write")->required();
  translate->add_option("--vocab", vocab, "Vocabulary (default: next to the checkpoint)");
  translate->add_option("--merges", merges_path, "Merge table (default: next to the checkpoint)");
  translate->add_option("--beam", beam, "Beam size")->capture_default_str();
  translate->add_option("--alpha", alpha, "Length penalty exponent")->capture_default_str();
  translate->add_option("--max-len", max_len, "Maximum output length")->capture_default_str();
  translate->callback([&] {
    action = [&] {
      return report_status(lc_translate(checkpoint.c_str(), opt(vocab), opt(merges_path), lang.c_str(),
                                        input.c_str(), output.c_str(), beam, alpha, max_len));
    };
  });

  auto* evaluate = app.add_subcommand("evaluate", "Decode and score every trained system");
  evaluate->add_option("--config", config, "Experiment config")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--split", split, "dev or test (default: config eval_split)")
      ->check(CLI::IsMember({"dev", "test"}));
  evaluate->callback([&] {
    action = [&] {
      return with_experiment(config, [&](lc_experiment* e) {
        CString table;
        const int rc = report_status(lc_experiment_evaluate(e, opt(split), &table.p));
        if (rc == 0) std::cout << table.str();
        return rc;
      });
    };
  });

  auto* report = app.add_subcommand("report", "Print the comparison report");
  report->add_option("--config", config, "Experiment config")->required()->check(CLI::ExistingFile);
  report->add_option("--out", out, "Write the report here");
  report->callback([&] {
    action = [&] {
      return with_experiment(config, [&](lc_experiment* e) {
        CString text;
        const int rc = report_status(lc_experiment_report(e, &text.p));
        return rc != 0 ? rc : emit(text.str(), out);
      });
    };
  });

  auto* dendro = app.add_subcommand("dendrogram", "Render the embedding dendrogram");
  dendro->add_option("--format", format, "svg, dot or json")->capture_default_str();
  dendro->add_option("--k", k, "Color a cut into K clusters");
  dendro->add_option("--config", config, "Experiment config")->check(CLI::ExistingFile);
  dendro->add_option("--input", input, "Embedding TSV or dendrogram JSON (without --config)")
      ->check(CLI::ExistingFile);
  dendro->add_option("--out", out, "Output file");
  dendro->callback([&] {
    action = [&] {
      CString text;
      int rc = 0;
      if (!config.empty()) {
        rc = with_experiment(config, [&](lc_experiment* e) {
          return report_status(lc_experiment_dendrogram(e, format.c_str(), k, &text.p));
        });
      } else if (!input.empty()) {
        rc = report_status(lc_dendrogram(input.c_str(), format.c_str(), k, &text.p));
      } else {
        std::cerr << "error: give --config or --input\n";
        return static_cast<int>(LC_ERR_INPUT);
      }
      return rc != 0 ? rc : emit(text.str(), out);
    };
  });

  auto* synth = app.add_subcommand("synth", "Write the synthetic six-language harness");
  synth->add_option("--seed", synth_seed, "Generator seed")->capture_default_str();
  synth->add_option("--out", out, "Output directory")->required();
  synth->callback([&] {
    action = [&] {
      CString summary;
      const int rc = report_status(lc_synth(synth_seed, out.c_str(), &summary.p));
      if (rc == 0) std::cout << summary.str() << "\n";
      return rc;
    };
  });

  auto* bleu = app.add_subcommand("bleu", "Score a hypothesis file against a reference file");
  bleu->add_option("--hyp", hyp, "Hypotheses, one per line")->required()->check(CLI::ExistingFile);
  bleu->add_option("--ref", ref, "References, one per line")->required()->check(CLI::ExistingFile);
  bleu->add_option("--json", out, "Also write the report JSON here");
  bleu->callback([&] {
    action = [&] {
      CString summary, json;
      const int rc = report_status(lc_bleu(hyp.c_str(), ref.c_str(), &summary.p, &json.p));
      if (rc != 0) return rc;
      std::cout << summary.str() << "\n";
      return out.empty() ? 0 : emit(json.str() + "\n", out);
    };
  });

  CLI11_PARSE(app, argc, argv);
  lc_set_log_level(verbosity);
  return action ? action() : 0;
}
