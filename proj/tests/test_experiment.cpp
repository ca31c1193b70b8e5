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


#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <set>

#include "langclust/error.hpp"
#include "langclust/experiment.hpp"
#include "langclust/log.hpp"
#include "langclust/reference.hpp"
#include "langclust/render.hpp"
#include "langclust/synth.hpp"
#include "support/errors.hpp"
#include "support/files.hpp"

using namespace langclust;
namespace fs = std::filesystem;

namespace {

SynthHarness small_harness(std::uint64_t seed, std::size_t sentences = 240) {
  SynthConfig c;
  c.seed = seed;
  c.sentences = sentences;
  return build_synthetic_harness(c);
}

// A config small enough that every stage runs in seconds.
std::string tiny_config(const std::string& run_root, const std::string& extra = {}) {
  return "train_manifest = manifest.train.tsv\n"
         "dev_manifest = manifest.dev.tsv\n"
         "test_manifest = manifest.test.tsv\n"
         "taxonomy = taxonomy.tsv\n"
         "num_merges = 150\n"
         "d_model = 8\n"
         "d_ff = 16\n"
         "num_layers = 1\n"
         "num_heads = 2\n"
         "max_len = 96\n"
         "tokens_per_lang = 24\n"
         "chunk_tokens = 256\n"
         "steps = 10\n"
         "warmup_steps = 10\n"
         "seed = 5\n"
         "beam_size = 2\n"
         "max_decode_len = 12\n"
         "eval_split = dev\n"
         "run_root = " + run_root + "\n" + extra;
}

double type_overlap(const SynthLanguage& a, const SynthLanguage& b) {
  const auto ta = vocabulary_types(a);
  const auto tb = vocabulary_types(b);
  const std::set<std::string> sb(tb.begin(), tb.end());
  std::size_t shared = 0;
  for (const auto& w : ta) shared += sb.count(w);
  return static_cast<double>(shared) / static_cast<double>(std::min(ta.size(), tb.size()));
}

}  // namespace

TEST_CASE("config parses keys, comments and relative paths") {
  const auto c = ExperimentConfig::parse(
      "# comment\n\n direction = one_to_many \nsteps = 12\nlate_checkpoints = 0.5, 0.75\n"
      "train_manifest = data/m.tsv\nbeam_size = 4\nalpha = 0.6\nmethod = family\n",
      "/base");
  CHECK(c.direction == TranslationDirection::kOneToMany);
  CHECK(c.steps == 12);
  CHECK(c.beam.beam_size == 4);
  CHECK(c.beam.alpha == 0.6);
  CHECK(c.method == ClusterMethod::kFamily);
  CHECK(c.train_manifest == "/base/data/m.tsv");
  CHECK(c.late_steps() == std::vector<std::size_t>{6, 9});
}

TEST_CASE("config defaults match the documented settings") {
  const ExperimentConfig c;
  CHECK(c.beam.beam_size == 6);
  CHECK(c.beam.alpha == 1.1);
  CHECK(c.steps == 3000);
  CHECK(c.late_steps() == std::vector<std::size_t>{2400, 2700});
}

TEST_CASE("config errors are parse errors") {
  CHECK(oracle::thrown_kind([] { ExperimentConfig::parse("nonsense line\n"); }) == ErrorKind::kParse);
  CHECK(oracle::thrown_kind([] { ExperimentConfig::parse("mystery = 1\n"); }) == ErrorKind::kParse);
  CHECK(oracle::thrown_kind([] { ExperimentConfig::parse("steps = 1\nsteps = 2\n"); }) ==
        ErrorKind::kParse);
  CHECK(oracle::thrown_kind([] { ExperimentConfig::parse("steps = ten\n"); }) == ErrorKind::kParse);
  CHECK(oracle::thrown_kind([] { ExperimentConfig::parse("direction = sideways\n"); }) ==
        ErrorKind::kParse);
  CHECK(oracle::thrown_kind([] { ExperimentConfig::parse("linkage = ward\n"); }) == ErrorKind::kParse);
}

TEST_CASE("config validation rejects out-of-range settings") {
  oracle::TempDir dir("cfgval");
  const auto h = small_harness(1, 60);
  write_synthetic_harness(h, dir.path().string());
  const auto base = dir.path().string();
  const auto ok = ExperimentConfig::parse(tiny_config("runs"), base);
  CHECK_NOTHROW(ok.validate());
  for (const std::string bad : {"steps = 0\n", "data_fraction = 1.5\n", "late_checkpoints = 1.0\n",
                                "eval_split = train\n", "random_seeds = 0\n", "beam_size = 0\n"}) {
    std::string text = tiny_config("runs");
    const auto key = bad.substr(0, bad.find(' '));
    const auto pos = text.find(key + " =");
    if (pos != std::string::npos) text.erase(pos, text.find('\n', pos) - pos + 1);
    const auto c = ExperimentConfig::parse(text + bad, base);
    CHECK_MESSAGE(oracle::thrown_kind([&] { c.validate(); }) == ErrorKind::kInput, bad);
  }
  const auto missing = ExperimentConfig::parse("train_manifest = nowhere.tsv\n", base);
  CHECK(oracle::thrown_kind([&] { missing.validate(); }) == ErrorKind::kIo);
}

TEST_CASE("canonical form round-trips and keeps the hash") {
  oracle::TempDir dir("canon");
  write_synthetic_harness(small_harness(1, 60), dir.path().string());
  const auto c = ExperimentConfig::parse(tiny_config("runs", "late_checkpoints = 0.25,0.5\n"),
                                         dir.path().string());
  const auto again = ExperimentConfig::parse(c.canonical(), "/elsewhere");
  CHECK(again.canonical() == c.canonical());
  CHECK(again.hash() == c.hash());
  CHECK(c.hash().size() == 16);
}

TEST_CASE("config hash follows settings and file contents, not paths or run_root") {
  oracle::TempDir a("hash_a");
  oracle::TempDir b("hash_b");
  const auto h = small_harness(2, 60);
  write_synthetic_harness(h, a.path().string());
  write_synthetic_harness(h, b.path().string());
  const auto ca = ExperimentConfig::parse(tiny_config("r1"), a.path().string());
  const auto cb = ExperimentConfig::parse(tiny_config("r2"), b.path().string());
  CHECK(ca.hash() == cb.hash());
  CHECK(ca.hash() == ExperimentConfig::parse(tiny_config("r1"), a.path().string()).hash());

  const auto steps = ExperimentConfig::parse(tiny_config("r1", "alpha = 0.5\n"), a.path().string());
  CHECK(steps.hash() != ca.hash());

  // Same paths, different corpus contents.
  const auto other = small_harness(3, 60);
  write_synthetic_harness(other, b.path().string());
  CHECK(ExperimentConfig::parse(tiny_config("r2"), b.path().string()).hash() != ca.hash());
}

TEST_CASE("synthetic harness is deterministic per seed") {
  oracle::TempDir a("synth_a");
  oracle::TempDir b("synth_b");
  const auto fa = write_synthetic_harness(small_harness(7), a.path().string());
  const auto fb = write_synthetic_harness(small_harness(7), b.path().string());
  for (const auto& name : {"a1.train.tsv", "b2.dev.tsv", "c1.test.tsv", "taxonomy.tsv"}) {
    CHECK(oracle::read_text(a.file(name)) == oracle::read_text(b.file(name)));
  }
  CHECK(oracle::read_text(fa.planted) == oracle::read_text(fb.planted));
  CHECK(small_harness(7).pivot != small_harness(8).pivot);
}

TEST_CASE("synthetic harness has the planted family structure") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto h = small_harness(seed, 600);
    REQUIRE(h.languages.size() == 6);
    CHECK(h.codes() == std::vector<std::string>{"a1", "a2", "b1", "b2", "c1", "c2"});
    CHECK(h.planted.k == 3);
    // Dialects share most word types; family b shares none with a or c.
    CHECK(type_overlap(h.languages[0], h.languages[1]) >= 0.8);
    CHECK(type_overlap(h.languages[2], h.languages[3]) >= 0.8);
    CHECK(type_overlap(h.languages[4], h.languages[5]) >= 0.8);
    for (std::size_t b : {2u, 3u}) {
      for (std::size_t other : {0u, 1u, 4u, 5u}) {
        CHECK(type_overlap(h.languages[b], h.languages[other]) == 0.0);
      }
    }
    const auto types = vocabulary_types(h.languages[0]);
    CHECK(types.size() >= 150);
    CHECK(types.size() <= 250);
    for (const auto& sentence : h.pivot) {
      const auto n = split_whitespace(sentence).size();
      CHECK(n >= 3);
      CHECK(n <= 12);
    }
    CHECK(h.train.size() == 540);
    CHECK(h.dev.size() == 30);
    CHECK(h.test.size() == 30);
    std::set<std::size_t> all(h.train.begin(), h.train.end());
    all.insert(h.dev.begin(), h.dev.end());
    all.insert(h.test.begin(), h.test.end());
    CHECK(all.size() == 600);
    const auto families = cluster_by_family(h.codes(), h.taxonomy);
    CHECK(rand_index(families, h.planted) == 1.0);
  }
}

TEST_CASE("family a is a word-for-word relexification, family b reverses order") {
  const auto h = small_harness(4, 50);
  for (std::size_t i = 0; i < h.pivot.size(); ++i) {
    const auto n = split_whitespace(h.pivot[i]).size();
    CHECK(split_whitespace(h.languages[0].sentences[i]).size() == n);
    CHECK(split_whitespace(h.languages[2].sentences[i]).size() == n);
  }
}

namespace {

// One tiny experiment driven through every stage, shared by the tests below.
struct TinyRun {
  oracle::TempDir dir{"tinyrun"};
  SynthHarness harness = small_harness(11, 120);
  std::optional<Experiment> exp;
  ClusterAssignment embedding, family;

  TinyRun() {
    set_log_level(LogLevel::kQuiet);
    write_synthetic_harness(harness, dir.path().string());
    exp.emplace(ExperimentConfig::parse(tiny_config(dir.file("runs")), dir.path().string()));
    exp->run_universal();
    embedding = exp->run_clustering(ClusterMethod::kEmbedding);
    family = exp->run_clustering(ClusterMethod::kFamily);
    for (std::uint64_t s = 1; s <= 3; ++s) exp->run_clustering(ClusterMethod::kRandom, std::nullopt, s);
    exp->define_system("Individual");
  }
};

TinyRun& tiny_run() {
  static TinyRun run;
  return run;
}

}  // namespace

TEST_CASE("run directory is named by the config hash") {
  auto& run = tiny_run();
  CHECK(fs::path(run.exp->run_dir()).filename() == run.exp->hash());
  CHECK(fs::exists(run.exp->artifact("config.txt")));
  CHECK(fs::exists(run.exp->artifact("bpe.merges")));
  CHECK(fs::exists(run.exp->artifact("vocab.tsv")));
  CHECK(fs::exists(run.exp->artifact("manifest.json")));
}

TEST_CASE("universal run exports final and late embeddings") {
  auto& run = tiny_run();
  const auto& m = run.exp->manifest();
  CHECK(m.late_checkpoints.size() == 2);
  CHECK(m.late_embeddings.size() == 2);
  for (const auto& p : m.late_checkpoints) CHECK(fs::exists(run.exp->artifact(p)));
  const auto embeds = run.exp->embeddings();
  CHECK(embeds.codes == run.harness.codes());
  CHECK(embeds.dim() == 8);
  // The universal model is the single-cluster model of all languages.
  CHECK(m.universal_checkpoint == "models/" + run.exp->model_key(run.harness.codes()) + ".bin");
  CHECK(run.exp->train_cluster(run.harness.codes()) == run.exp->artifact(m.universal_checkpoint));
}

TEST_CASE("clustering stages record their systems") {
  auto& run = tiny_run();
  const auto& systems = run.exp->manifest().systems;
  CHECK(systems.at("Universal").front().assignment.k == 1);
  CHECK(systems.at("Individual").front().assignment.k == 6);
  CHECK(systems.at("Family").front().assignment.k == 3);
  CHECK(systems.at("Embedding").front().assignment == run.embedding);
  CHECK(fs::exists(run.exp->artifact("dendrogram.json")));
  CHECK(fs::exists(run.exp->artifact("elbow.tsv")));
  CHECK(run.exp->dendrogram().leaves() == 6);
  const auto& random = systems.at("Random");
  REQUIRE(random.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(random[i].seed == i + 1);
    CHECK(random[i].assignment.k == run.embedding.k);
  }
  CHECK(rand_index(run.family, run.harness.planted) == 1.0);
}

TEST_CASE("a reopened experiment reads the stored manifest") {
  auto& run = tiny_run();
  Experiment again(run.exp->config());
  CHECK(again.hash() == run.exp->hash());
  CHECK(again.manifest().to_json() == run.exp->manifest().to_json());
  CHECK(RunManifest::from_json(again.manifest().to_json()).to_json() == again.manifest().to_json());
}

TEST_CASE("evaluation scores injected reference translations at 100") {
  auto& run = tiny_run();
  auto& exp = *run.exp;
  // Train only the family clusters; every other system stays missing.
  exp.run_cluster_training("Family");
  for (const auto& members : run.family.members()) {
    const auto key = exp.model_key(members);
    for (const auto& code : members) {
      const auto rows = read_parallel_text(run.dir.file(code + ".dev.tsv"));
      std::string text;
      for (const auto& [src, tgt] : rows) text += tgt + "\n";
      fs::create_directories(exp.artifact("translations/" + key));
      oracle::write_text(exp.artifact("translations/" + key + "/" + code + ".dev.txt"), text);
    }
  }
  const auto table = exp.run_evaluation("dev");
  for (const auto& code : run.harness.codes()) {
    REQUIRE(table.cell("Family", code));
    CHECK(*table.cell("Family", code) == doctest::Approx(100.0));
  }
  CHECK(table.mean("Family") == doctest::Approx(100.0));
  const auto& cells = exp.manifest().scores.at("Family").at("a1");
  REQUIRE(cells.size() == 1);
  CHECK(cells.front().checkpoint.rfind("models/", 0) == 0);
  CHECK(cells.front().hypotheses == "translations/" + exp.model_key({"a1", "a2"}) + "/a1.dev.txt");
  CHECK(cells.front().test_file == run.dir.file("a1.dev.tsv"));

  const auto markdown = table.to_markdown();
  CHECK(markdown.find("missing") != std::string::npos);
  CHECK(markdown.find("100.00*") != std::string::npos);
}

TEST_CASE("evaluation decodes with the model when no cached translation exists") {
  auto& run = tiny_run();
  auto& exp = *run.exp;
  const auto table = exp.run_evaluation("dev");
  REQUIRE(table.cell("Universal", "b1"));
  CHECK(*table.cell("Universal", "b1") >= 0.0);
  CHECK(*table.cell("Universal", "b1") <= 100.0);
  const auto hyps = exp.artifact("translations/" + exp.model_key(run.harness.codes()) + "/b1.dev.txt");
  REQUIRE(fs::exists(hyps));
  std::size_t lines = 0;
  std::ifstream in(hyps);
  for (std::string l; std::getline(in, l);) ++lines;
  CHECK(lines == run.harness.dev.size());
}

TEST_CASE("random system cells are the mean over seeds") {
  auto& run = tiny_run();
  auto& exp = *run.exp;
  exp.run_cluster_training("Random");
  const auto table = exp.run_evaluation("dev");
  for (const auto& code : run.harness.codes()) {
    const auto& cells = exp.manifest().scores.at("Random").at(code);
    REQUIRE(cells.size() == 3);
    double sum = 0.0;
    for (const auto& c : cells) sum += c.report.bleu;
    CHECK(*table.cell("Random", code) == doctest::Approx(sum / 3.0).epsilon(1e-12));
  }
}

TEST_CASE("report shows the run and labels published numbers as not reproduced") {
  auto& run = tiny_run();
  const auto text = run.exp->report();
  CHECK(text.find(run.exp->hash()) != std::string::npos);
  CHECK(text.find("Random (seed 2)") != std::string::npos);
  CHECK(text.find("Family: K=3") != std::string::npos);
  CHECK(text.find("Reference (published), not reproduced") != std::string::npos);
  CHECK(text.find("23 languages to English, by clustering method") != std::string::npos);
  CHECK(text.find("English to 23 languages") == std::string::npos);
}

TEST_CASE("embeddings do not depend on the run root") {
  oracle::TempDir dir("runroot");
  set_log_level(LogLevel::kQuiet);
  write_synthetic_harness(small_harness(12, 60), dir.path().string());
  const auto base = dir.path().string();
  Experiment a(ExperimentConfig::parse(tiny_config(dir.file("r1")), base));
  Experiment b(ExperimentConfig::parse(tiny_config(dir.file("r2")), base));
  CHECK(a.hash() == b.hash());
  a.run_universal();
  b.run_universal();
  CHECK(oracle::read_text(a.artifact("universal/embeddings.tsv")) ==
        oracle::read_text(b.artifact("universal/embeddings.tsv")));
}

TEST_CASE("comparison table stars the best system and marks gaps") {
  ComparisonTable t;
  t.languages = {"x", "y"};
  t.systems = {"Universal", "Embedding"};
  t.cells["Universal"]["x"] = 10.0;
  t.cells["Embedding"]["x"] = 12.5;
  t.cells["Universal"]["y"] = 7.0;
  CHECK(t.mean("Universal") == doctest::Approx(8.5));
  CHECK(t.mean("Embedding") == doctest::Approx(12.5));
  CHECK_FALSE(t.cell("Embedding", "y").has_value());
  const auto md = t.to_markdown();
  CHECK(md.find("12.50*") != std::string::npos);
  CHECK(md.find("10.00*") == std::string::npos);
  CHECK(md.find("missing") != std::string::npos);
}

TEST_CASE("dendrogram rendering") {
  Dendrogram two{{"p", "q"}, {Merge{0, 1, 0.5, 2}}};
  CHECK(leaf_order(two) == std::vector<std::size_t>{0, 1});
  const auto svg = render_dendrogram(two, DendrogramFormat::kSvg);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find(">p<") != std::string::npos);
  CHECK(svg == render_dendrogram(two, DendrogramFormat::kSvg));
  CHECK(render_dendrogram(two, DendrogramFormat::kDot).rfind("digraph", 0) == 0);
  CHECK(dendrogram_from_json(render_dendrogram(two, DendrogramFormat::kJson)) == two);
  CHECK(parse_dendrogram_format("dot") == DendrogramFormat::kDot);
  CHECK(oracle::thrown_kind([] { parse_dendrogram_format("png"); }) == ErrorKind::kInput);
}

TEST_CASE("published dendrogram renders 23 leaves in 7 colors") {
  const auto d = published_dendrogram("many_to_one");
  REQUIRE(d.leaves() == 23);
  const auto svg = render_dendrogram(d, DendrogramFormat::kSvg, 7);
  std::set<std::string> colors;
  // Leaf labels carry their cluster color; singletons have no links.
  for (std::size_t pos = svg.find("fill=\"#"); pos != std::string::npos;
       pos = svg.find("fill=\"#", pos + 1)) {
    colors.insert(svg.substr(pos + 6, 7));
  }
  colors.erase("#808080");
  colors.erase("#000000");
  CHECK(colors.size() == 7);
  for (const auto& code : published_codes()) CHECK(svg.find(">" + code + "<") != std::string::npos);
  // The 7-cut reproduces the published memberships.
  const auto cut = cut_dendrogram(d, 7);
  auto members = cut.members();
  auto expected = published_memberships("many_to_one");
  for (auto& m : members) std::sort(m.begin(), m.end());
  for (auto& m : expected) std::sort(m.begin(), m.end());
  std::sort(members.begin(), members.end());
  std::sort(expected.begin(), expected.end());
  CHECK(members == expected);
  CHECK(cut_dendrogram(published_dendrogram("one_to_many"), 5).k == 5);
}

TEST_CASE("published tables cover the 23 languages") {
  const auto& tables = published_tables();
  REQUIRE(tables.size() == 3);
  for (const auto& t : tables) {
    CHECK(t.languages.size() == 23);
    for (const auto& [system, values] : t.rows) CHECK(values.size() == 23);
  }
  CHECK(published_codes().size() == 23);
  CHECK(cluster_by_family(published_codes(), TaxonomyTable::builtin()).k == 8);
}
