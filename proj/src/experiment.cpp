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


#include "langclust/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <set>
#include <sstream>

#include "langclust/error.hpp"
#include "langclust/log.hpp"
#include "langclust/reference.hpp"

namespace langclust {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  fs::create_directories(fs::path(path).parent_path());
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) fail(ErrorKind::kIo, "cannot write " + path);
    out << text;
  }
  fs::rename(tmp, path);
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot read " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string joined(const std::vector<std::string>& codes, char sep) {
  std::string out;
  for (const auto& c : codes) {
    if (!out.empty()) out += sep;
    out += c;
  }
  return out;
}

std::vector<std::string> sorted(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  return v;
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* first = value.data();
  const char* last = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) {
    fail(ErrorKind::kParse, "config: invalid value '" + value + "' for " + key);
  }
  return out;
}

// The settings table: every key with its reader and writer.
struct Field {
  std::function<void(ExperimentConfig&, const std::string&, const std::string& base)> read;
  std::function<std::string(const ExperimentConfig&)> write;
  bool is_path = false;
  bool hashed = true;
};

std::string resolve(const std::string& value, const std::string& base) {
  if (value.empty()) return value;
  fs::path p(value);
  return (p.is_absolute() ? p : fs::path(base) / p).lexically_normal().string();
}

const std::map<std::string, Field>& fields() {
  using C = ExperimentConfig;
  auto size_field = [](std::size_t C::*member) {
    return Field{[member](C& c, const std::string& v, const std::string&) {
                   c.*member = parse_number<std::size_t>("value", v);
                 },
                 [member](const C& c) { return std::to_string(c.*member); }};
  };
  auto model_field = [](std::size_t ModelConfig::*member) {
    return Field{[member](C& c, const std::string& v, const std::string&) {
                   c.model.*member = parse_number<std::size_t>("value", v);
                 },
                 [member](const C& c) { return std::to_string(c.model.*member); }};
  };
  auto double_field = [](double C::*member) {
    return Field{[member](C& c, const std::string& v, const std::string&) {
                   c.*member = parse_number<double>("value", v);
                 },
                 [member](const C& c) { return format_double(c.*member); }};
  };
  auto path_field = [](std::string C::*member) {
    return Field{[member](C& c, const std::string& v, const std::string& base) {
                   c.*member = resolve(v, base);
                 },
                 [member](const C& c) { return c.*member; }, true};
  };
  static const std::map<std::string, Field> table = {
      {"alpha", Field{[](C& c, const std::string& v, const std::string&) {
                        c.beam.alpha = parse_number<double>("alpha", v);
                      },
                      [](const C& c) { return format_double(c.beam.alpha); }}},
      {"beam_size", Field{[](C& c, const std::string& v, const std::string&) {
                            c.beam.beam_size = parse_number<std::size_t>("beam_size", v);
                          },
                          [](const C& c) { return std::to_string(c.beam.beam_size); }}},
      {"chunk_tokens", size_field(&C::chunk_tokens)},
      {"clip_norm", double_field(&C::clip_norm)},
      {"d_ff", model_field(&ModelConfig::d_ff)},
      {"d_model", Field{[](C& c, const std::string& v, const std::string&) {
                          c.model.d_model = parse_number<std::size_t>("d_model", v);
                          c.model.lang_emb_dim = c.model.d_model;
                        },
                        [](const C& c) { return std::to_string(c.model.d_model); }}},
      {"data_fraction", double_field(&C::data_fraction)},
      {"dev_manifest", path_field(&C::dev_manifest)},
      {"direction", Field{[](C& c, const std::string& v, const std::string&) {
                            if (v == "many_to_one") {
                              c.direction = TranslationDirection::kManyToOne;
                            } else if (v == "one_to_many") {
                              c.direction = TranslationDirection::kOneToMany;
                            } else {
                              fail(ErrorKind::kParse, "config: direction must be many_to_one or one_to_many");
                            }
                          },
                          [](const C& c) { return std::string(to_string(c.direction)); }}},
      {"dropout", Field{[](C& c, const std::string& v, const std::string&) {
                          c.model.dropout = parse_number<double>("dropout", v);
                        },
                        [](const C& c) { return format_double(c.model.dropout); }}},
      {"eval_split", Field{[](C& c, const std::string& v, const std::string&) { c.eval_split = v; },
                           [](const C& c) { return c.eval_split; }}},
      {"k_max", size_field(&C::k_max)},
      {"k_override", size_field(&C::k_override)},
      {"late_checkpoints",
       Field{[](C& c, const std::string& v, const std::string&) {
               c.late_checkpoints.clear();
               std::stringstream ss(v);
               std::string item;
               while (std::getline(ss, item, ',')) {
                 c.late_checkpoints.push_back(parse_number<double>("late_checkpoints", trim(item)));
               }
             },
             [](const C& c) {
               std::string out;
               for (double f : c.late_checkpoints) out += (out.empty() ? "" : ",") + format_double(f);
               return out;
             }}},
      {"linkage", Field{[](C& c, const std::string& v, const std::string&) { c.linkage = parse_linkage(v); },
                        [](const C& c) { return std::string(to_string(c.linkage)); }}},
      {"lr_scale", double_field(&C::lr_scale)},
      {"max_decode_len", Field{[](C& c, const std::string& v, const std::string&) {
                                 c.beam.max_decode_len = parse_number<std::size_t>("max_decode_len", v);
                               },
                               [](const C& c) { return std::to_string(c.beam.max_decode_len); }}},
      {"max_len", model_field(&ModelConfig::max_len)},
      {"method", Field{[](C& c, const std::string& v, const std::string&) { c.method = parse_method(v); },
                       [](const C& c) { return std::string(to_string(c.method)); }}},
      {"metric", Field{[](C& c, const std::string& v, const std::string&) { c.metric = parse_metric(v); },
                       [](const C& c) { return std::string(to_string(c.metric)); }}},
      {"num_heads", model_field(&ModelConfig::num_heads)},
      {"num_layers", model_field(&ModelConfig::num_layers)},
      {"num_merges", size_field(&C::num_merges)},
      {"random_seeds", size_field(&C::random_seeds)},
      {"run_root", Field{[](C& c, const std::string& v, const std::string& base) { c.run_root = resolve(v, base); },
                         [](const C& c) { return c.run_root; }, true, false}},
      {"seed", Field{[](C& c, const std::string& v, const std::string&) {
                       c.seed = parse_number<std::uint64_t>("seed", v);
                     },
                     [](const C& c) { return std::to_string(c.seed); }}},
      {"steps", size_field(&C::steps)},
      {"taxonomy", path_field(&C::taxonomy)},
      {"test_manifest", path_field(&C::test_manifest)},
      {"tokens_per_lang", size_field(&C::tokens_per_lang)},
      {"train_manifest", path_field(&C::train_manifest)},
      {"warmup_steps", Field{[](C& c, const std::string& v, const std::string&) {
                               c.warmup_steps = parse_number<std::uint64_t>("warmup_steps", v);
                             },
                             [](const C& c) { return std::to_string(c.warmup_steps); }}},
  };
  return table;
}

// Content hash of a manifest and the corpus files it lists.
std::uint64_t hash_manifest(const std::string& path, std::uint64_t h) {
  h = fnv1a(read_file(path), h);
  for (const auto& e : load_manifest(path)) h = fnv1a(read_file(e.path), h);
  return h;
}

json cell_to_json(const ScoredCell& c) {
  return {{"report", json::parse(c.report.to_json())},
          {"checkpoint", c.checkpoint},
          {"test_file", c.test_file},
          {"hypotheses", c.hypotheses}};
}

}  // namespace

const char* to_string(TranslationDirection d) {
  return d == TranslationDirection::kManyToOne ? "many_to_one" : "one_to_many";
}

ExperimentConfig ExperimentConfig::parse(const std::string& text, const std::string& base_dir) {
  ExperimentConfig c;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      fail(ErrorKind::kParse, "config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    const auto it = fields().find(key);
    if (it == fields().end()) {
      fail(ErrorKind::kParse, "config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    if (!seen.insert(key).second) {
      fail(ErrorKind::kParse, "config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
    try {
      it->second.read(c, value, base_dir);
    } catch (const Error& e) {
      fail(ErrorKind::kParse, "config line " + std::to_string(lineno) + " (" + key + "): " + e.what());
    }
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  auto base = fs::path(path).parent_path().string();
  if (base.empty()) base = ".";
  return parse(read_file(path), base);
}

std::string ExperimentConfig::canonical() const {
  std::string out;
  for (const auto& [key, field] : fields()) out += key + " = " + field.write(*this) + "\n";
  return out;
}

std::string ExperimentConfig::hash() const {
  std::uint64_t h = fnv1a("langclust-config-v1");
  for (const auto& [key, field] : fields()) {
    if (!field.hashed) continue;
    h = fnv1a(key + "=", h);
    if (!field.is_path) {
      h = fnv1a(field.write(*this) + "\n", h);
      continue;
    }
    const std::string value = field.write(*this);
    if (value.empty()) {
      h = fnv1a("<none>\n", h);
    } else if (key == "taxonomy") {
      h = fnv1a(read_file(value), h);
    } else {
      h = hash_manifest(value, h);
    }
  }
  return hex16(h);
}

void ExperimentConfig::validate() const {
  if (train_manifest.empty()) fail(ErrorKind::kInput, "config: train_manifest is required");
  for (const auto* p : {&train_manifest, &dev_manifest, &test_manifest, &taxonomy}) {
    if (!p->empty() && !fs::exists(*p)) fail(ErrorKind::kIo, "config: file not found: " + *p);
  }
  ModelConfig m = model;
  m.vocab_size = std::max<std::size_t>(m.vocab_size, 1);
  m.validate();
  if (num_merges == 0) fail(ErrorKind::kInput, "config: num_merges must be positive");
  if (tokens_per_lang == 0) fail(ErrorKind::kInput, "config: tokens_per_lang must be positive");
  if (steps == 0) fail(ErrorKind::kInput, "config: steps must be positive");
  if (warmup_steps == 0) fail(ErrorKind::kInput, "config: warmup_steps must be positive");
  if (!(lr_scale > 0.0)) fail(ErrorKind::kInput, "config: lr_scale must be positive");
  if (!(clip_norm > 0.0)) fail(ErrorKind::kInput, "config: clip_norm must be positive");
  if (!(data_fraction > 0.0 && data_fraction <= 1.0)) {
    fail(ErrorKind::kInput, "config: data_fraction must lie in (0, 1]");
  }
  if (random_seeds == 0) fail(ErrorKind::kInput, "config: random_seeds must be positive");
  for (double f : late_checkpoints) {
    if (!(f > 0.0 && f < 1.0)) fail(ErrorKind::kInput, "config: late_checkpoints must lie in (0, 1)");
  }
  if (eval_split != "dev" && eval_split != "test") {
    fail(ErrorKind::kInput, "config: eval_split must be dev or test");
  }
  beam.validate();
}

std::vector<std::size_t> ExperimentConfig::late_steps() const {
  std::set<std::size_t> out;
  for (double f : late_checkpoints) {
    const auto s = static_cast<std::size_t>(std::llround(f * static_cast<double>(steps)));
    if (s >= 1 && s < steps) out.insert(s);
  }
  return {out.begin(), out.end()};
}

std::string RunManifest::to_json() const {
  json j;
  j["config_hash"] = config_hash;
  j["universal_checkpoint"] = universal_checkpoint;
  j["late_checkpoints"] = late_checkpoints;
  j["embeddings"] = embeddings;
  j["late_embeddings"] = late_embeddings;
  j["checkpoints"] = checkpoints;
  json systems_json = json::object();
  for (const auto& [name, runs] : systems) {
    json arr = json::array();
    for (const auto& r : runs) {
      arr.push_back({{"seed", r.seed}, {"assignment", json::parse(assignment_to_json(r.assignment))}});
    }
    systems_json[name] = arr;
  }
  j["systems"] = systems_json;
  json scores_json = json::object();
  for (const auto& [system, by_lang] : scores) {
    for (const auto& [lang, cells] : by_lang) {
      json arr = json::array();
      for (const auto& c : cells) arr.push_back(cell_to_json(c));
      scores_json[system][lang] = arr;
    }
  }
  j["scores"] = scores_json;
  return j.dump(2);
}

RunManifest RunManifest::from_json(const std::string& text) {
  try {
    const auto j = json::parse(text);
    RunManifest m;
    m.config_hash = j.at("config_hash").get<std::string>();
    m.universal_checkpoint = j.value("universal_checkpoint", "");
    m.late_checkpoints = j.value("late_checkpoints", std::vector<std::string>{});
    m.embeddings = j.value("embeddings", "");
    m.late_embeddings = j.value("late_embeddings", std::vector<std::string>{});
    m.checkpoints = j.value("checkpoints", std::map<std::string, std::string>{});
    // Bound to locals: items() must not outlive the object it iterates.
    const json systems = j.value("systems", json::object());
    const json scores = j.value("scores", json::object());
    for (const auto& [name, runs] : systems.items()) {
      for (const auto& r : runs) {
        m.systems[name].push_back(
            SystemRun{assignment_from_json(r.at("assignment").dump()), r.at("seed").get<std::uint64_t>()});
      }
    }
    for (const auto& [system, by_lang] : scores.items()) {
      for (const auto& [lang, cells] : by_lang.items()) {
        for (const auto& c : cells) {
          m.scores[system][lang].push_back(ScoredCell{BleuReport::from_json(c.at("report").dump()),
                                                      c.at("checkpoint").get<std::string>(),
                                                      c.at("test_file").get<std::string>(),
                                                      c.at("hypotheses").get<std::string>()});
        }
      }
    }
    return m;
  } catch (const json::exception& e) {
    fail(ErrorKind::kParse, std::string("run manifest: ") + e.what());
  }
}

std::optional<double> ComparisonTable::cell(const std::string& system, const std::string& lang) const {
  const auto s = cells.find(system);
  if (s == cells.end()) return std::nullopt;
  const auto l = s->second.find(lang);
  if (l == s->second.end()) return std::nullopt;
  return l->second;
}

std::optional<double> ComparisonTable::mean(const std::string& system) const {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& lang : languages) {
    if (auto v = cell(system, lang)) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

std::string ComparisonTable::to_markdown() const {
  std::ostringstream out;
  out << "| language |";
  for (const auto& s : systems) out << ' ' << s << " |";
  out << "\n|---|";
  for (std::size_t i = 0; i < systems.size(); ++i) out << "---|";
  out << '\n';
  char buf[32];
  auto row = [&](const std::string& label, auto value_of) {
    std::optional<double> best;
    for (const auto& s : systems) {
      if (auto v = value_of(s)) best = best ? std::max(*best, *v) : *v;
    }
    out << "| " << label << " |";
    for (const auto& s : systems) {
      const auto v = value_of(s);
      if (!v) {
        out << " missing |";
        continue;
      }
      std::snprintf(buf, sizeof(buf), "%.2f", *v);
      out << ' ' << buf << (best && *v == *best ? "*" : "") << " |";
    }
    out << '\n';
  };
  for (const auto& lang : languages) {
    row(lang, [&](const std::string& s) { return cell(s, lang); });
  }
  row("mean", [&](const std::string& s) { return mean(s); });
  return out.str();
}

Experiment::Experiment(ExperimentConfig config) : config_(std::move(config)) {
  config_.validate();
  hash_ = config_.hash();
  run_dir_ = (fs::path(config_.run_root) / hash_).string();
  fs::create_directories(run_dir_);
  const auto config_copy = artifact("config.txt");
  if (!fs::exists(config_copy)) write_file(config_copy, config_.canonical());
  const auto manifest_path = artifact("manifest.json");
  if (fs::exists(manifest_path)) {
    manifest_ = RunManifest::from_json(read_file(manifest_path));
    if (manifest_.config_hash != hash_) {
      fail(ErrorKind::kInput, "run manifest in " + run_dir_ + " belongs to another config");
    }
  } else {
    manifest_.config_hash = hash_;
    save_manifest();
  }
}

std::string Experiment::artifact(const std::string& relative) const {
  return (fs::path(run_dir_) / relative).string();
}

void Experiment::save_manifest() const { write_file(artifact("manifest.json"), manifest_.to_json() + "\n"); }

std::string Experiment::manifest_file(const std::string& split) const {
  if (split == "train") return config_.train_manifest;
  if (split == "dev") return config_.dev_manifest;
  if (split == "test") return config_.test_manifest;
  fail(ErrorKind::kInput, "unknown split '" + split + "'");
}

std::vector<ManifestEntry> Experiment::manifest_entries(const std::string& split) const {
  const auto path = manifest_file(split);
  if (path.empty()) fail(ErrorKind::kInput, "config has no " + split + "_manifest");
  return load_manifest(path);
}

const std::vector<std::string>& Experiment::languages() {
  if (languages_.empty()) {
    std::set<std::string> codes;
    for (const auto& e : manifest_entries("train")) {
      if (!codes.insert(e.lang_code).second) {
        fail(ErrorKind::kInput, "train manifest lists " + e.lang_code + " twice");
      }
    }
    if (codes.empty()) fail(ErrorKind::kInput, "train manifest is empty");
    languages_.assign(codes.begin(), codes.end());
  }
  return languages_;
}

const BpeCodec& Experiment::codec() {
  if (codec_) return *codec_;
  const auto path = artifact("bpe.merges");
  if (fs::exists(path)) {
    codec_.emplace(load_merges(path));
    return *codec_;
  }
  std::vector<std::vector<std::string>> corpora;
  for (const auto& e : manifest_entries("train")) {
    std::vector<std::string> src, tgt;
    for (auto& [s, t] : read_parallel_text(e.path)) {
      src.push_back(std::move(s));
      tgt.push_back(std::move(t));
    }
    corpora.push_back(std::move(src));
    corpora.push_back(std::move(tgt));
  }
  auto table = learn_bpe(corpora, config_.num_merges);
  save_merges(table, path);
  codec_.emplace(std::move(table));
  return *codec_;
}

const Vocabulary& Experiment::vocabulary() {
  if (vocab_) return *vocab_;
  const auto path = artifact("vocab.tsv");
  if (fs::exists(path)) {
    vocab_.emplace(Vocabulary::load(path));
    return *vocab_;
  }
  std::vector<std::vector<std::string>> corpora;
  for (const auto& e : manifest_entries("train")) {
    std::vector<std::string> lines;
    for (auto& [s, t] : read_parallel_text(e.path)) {
      lines.push_back(std::move(s));
      lines.push_back(std::move(t));
    }
    corpora.push_back(std::move(lines));
  }
  vocab_.emplace(Vocabulary::build(codec(), corpora, languages()));
  vocab_->save(path);
  return *vocab_;
}

std::vector<ParallelCorpus> Experiment::load_split(const std::string& split,
                                                   const std::vector<std::string>& codes) {
  const auto entries = manifest_entries(split);
  std::vector<ParallelCorpus> out;
  for (const auto& code : sorted(codes)) {
    const auto it = std::find_if(entries.begin(), entries.end(),
                                 [&](const ManifestEntry& e) { return e.lang_code == code; });
    if (it == entries.end()) fail(ErrorKind::kLookup, split + " manifest has no corpus for " + code);
    auto corpus = load_corpus(it->path, code, it->direction, codec(), vocabulary());
    // Files hold language<TAB>pivot for to_pivot entries; flip to the
    // configured translation direction.
    const bool file_to_pivot = it->direction == Direction::kToPivot;
    const bool want_to_pivot = config_.direction == TranslationDirection::kManyToOne;
    if (file_to_pivot != want_to_pivot) {
      for (auto& p : corpus.pairs) std::swap(p.src, p.tgt);
    }
    corpus.direction = want_to_pivot ? Direction::kToPivot : Direction::kFromPivot;
    if (split == "train") corpus = subsample(corpus, config_.data_fraction, config_.seed);
    out.push_back(std::move(corpus));
  }
  return out;
}

std::string Experiment::model_key(const std::vector<std::string>& codes) const {
  const auto s = sorted(codes);
  const std::string key = joined(s, '+');
  if (key.size() <= 48) return key;
  return "k" + std::to_string(s.size()) + "-" + hex16(fnv1a(key));
}

std::string Experiment::train_cluster(const std::vector<std::string>& codes,
                                      const std::vector<std::size_t>& checkpoint_steps,
                                      const CheckpointFn& on_checkpoint) {
  if (codes.empty()) fail(ErrorKind::kInput, "cluster has no languages");
  const auto s = sorted(codes);
  const std::string key = model_key(s);
  const std::string rel = "models/" + key + ".bin";
  const std::string path = artifact(rel);
  if (fs::exists(path)) {
    manifest_.checkpoints[key] = rel;
    return path;
  }
  auto corpora = upsample(load_split("train", s), derive_seed(config_.seed, "upsample"));
  ModelConfig mc = config_.model;
  mc.lang_emb_dim = mc.d_model;
  mc.vocab_size = vocabulary().size();
  const std::string identity = joined(s, '+');
  TransformerModel model(mc, s, derive_seed(config_.seed, "model:" + identity));
  TrainConfig tc;
  tc.steps = config_.steps;
  tc.tokens_per_lang = config_.tokens_per_lang;
  tc.warmup_steps = config_.warmup_steps;
  tc.lr_scale = config_.lr_scale;
  tc.clip_norm = config_.clip_norm;
  tc.chunk_tokens = config_.chunk_tokens;
  tc.seed = derive_seed(config_.seed, "stream:" + identity);
  tc.log_every = config_.steps >= 10 ? config_.steps / 10 : 1;
  log_info("training " + key + " for " + std::to_string(tc.steps) + " steps");
  const auto result = train_model(model, corpora, tc, checkpoint_steps, on_checkpoint);
  fs::create_directories(artifact("models"));
  model.save(path, "vocab.tsv");
  std::string curve;
  for (double l : result.losses) curve += format_double(l) + "\n";
  write_file(artifact("models/" + key + ".loss.txt"), curve);
  manifest_.checkpoints[key] = rel;
  save_manifest();
  return path;
}

LanguageEmbeddingSet Experiment::export_embeddings(const std::string& checkpoint,
                                                   const std::string& out_tsv) {
  const auto model = TransformerModel::load(checkpoint);
  auto set = model.extract_language_embeddings();
  save_embeddings_tsv(set, out_tsv);
  return set;
}

void Experiment::run_universal() {
  const auto& codes = languages();
  const auto late = config_.late_steps();
  std::vector<std::string> late_ckpts, late_embeds;
  for (auto step : late) {
    late_ckpts.push_back("universal/step" + std::to_string(step) + ".bin");
    late_embeds.push_back("universal/embeddings.step" + std::to_string(step) + ".tsv");
  }
  const std::string key = model_key(codes);
  const bool have_final = fs::exists(artifact("models/" + key + ".bin"));
  const bool have_late = std::all_of(late_ckpts.begin(), late_ckpts.end(),
                                     [&](const std::string& p) { return fs::exists(artifact(p)); });
  if (have_final && !have_late) {
    // A finished universal model without its late checkpoints (for instance
    // trained as a K=1 cluster) is retrained to recover them.
    fs::remove(artifact("models/" + key + ".bin"));
  }
  fs::create_directories(artifact("universal"));
  const auto final_path = train_cluster(codes, late, [&](std::size_t step, const TransformerModel& m) {
    const auto i = static_cast<std::size_t>(std::find(late.begin(), late.end(), step) - late.begin());
    m.save(artifact(late_ckpts[i]), "vocab.tsv");
    save_embeddings_tsv(m.extract_language_embeddings(), artifact(late_embeds[i]));
  });
  manifest_.universal_checkpoint = "models/" + key + ".bin";
  manifest_.late_checkpoints = late_ckpts;
  manifest_.late_embeddings = late_embeds;
  manifest_.embeddings = "universal/embeddings.tsv";
  export_embeddings(final_path, artifact(manifest_.embeddings));
  define_system("Universal");
}

LanguageEmbeddingSet Experiment::embeddings() const {
  if (manifest_.embeddings.empty()) {
    fail(ErrorKind::kInput, "no embedding export yet: run train-universal first");
  }
  return load_embeddings_tsv(artifact(manifest_.embeddings));
}

Dendrogram Experiment::dendrogram() const {
  const auto path = artifact("dendrogram.json");
  if (!fs::exists(path)) fail(ErrorKind::kInput, "no dendrogram yet: run embedding clustering first");
  return dendrogram_from_json(read_file(path));
}

ClusterAssignment Experiment::define_system(const std::string& system) {
  const auto& codes = languages();
  ClusterAssignment a;
  a.method = ClusterMethod::kEmbedding;
  a.codes = codes;
  if (system == "Universal") {
    a.k = 1;
    a.cluster.assign(codes.size(), 0);
  } else if (system == "Individual") {
    a.k = codes.size();
    for (std::size_t i = 0; i < codes.size(); ++i) a.cluster.push_back(i);
  } else {
    fail(ErrorKind::kInput, "define_system handles Universal and Individual, not " + system);
  }
  manifest_.systems[system] = {SystemRun{a, 0}};
  save_manifest();
  return a;
}

ClusterAssignment Experiment::run_clustering(ClusterMethod method, std::optional<std::size_t> k,
                                             std::optional<std::uint64_t> seed,
                                             const std::string& taxonomy_path) {
  const auto& codes = languages();
  if (!k && config_.k_override != 0) k = config_.k_override;
  ClusterAssignment a;
  std::uint64_t used_seed = 0;
  switch (method) {
    case ClusterMethod::kEmbedding: {
      const auto embeds = embeddings();
      const auto d = agglomerative_cluster(embeds, config_.linkage, config_.metric);
      write_file(artifact("dendrogram.json"), dendrogram_to_json(d) + "\n");
      std::size_t chosen = 0;
      if (k) {
        chosen = *k;
      } else {
        const std::size_t k_max = config_.k_max != 0 ? config_.k_max : embeds.count() - 1;
        if (k_max < 3) {
          fail(ErrorKind::kInput, "elbow needs k_max >= 3 (" + std::to_string(embeds.count()) +
                                      " languages); set k_override");
        }
        const auto elbow = elbow_optimal_k(embeds, d, k_max);
        std::string curve;
        for (std::size_t i = 0; i < elbow.wcss.size(); ++i) {
          curve += std::to_string(i + 1) + "\t" + format_double(elbow.wcss[i]) + "\n";
        }
        write_file(artifact("elbow.tsv"), curve);
        chosen = elbow.k;
      }
      a = cut_dendrogram(d, chosen);
      break;
    }
    case ClusterMethod::kFamily: {
      const std::string path = !taxonomy_path.empty() ? taxonomy_path : config_.taxonomy;
      a = cluster_by_family(codes, path.empty() ? TaxonomyTable::builtin() : TaxonomyTable::load(path));
      break;
    }
    case ClusterMethod::kRandom: {
      std::size_t chosen = 0;
      if (k) {
        chosen = *k;
      } else {
        const auto it = manifest_.systems.find("Embedding");
        chosen = it != manifest_.systems.end() && !it->second.empty()
                     ? it->second.front().assignment.k
                     : run_clustering(ClusterMethod::kEmbedding).k;
      }
      used_seed = seed ? *seed : config_.seed;
      a = random_clusters(codes, chosen, used_seed);
      break;
    }
  }
  const std::string system = method == ClusterMethod::kEmbedding ? "Embedding"
                             : method == ClusterMethod::kFamily  ? "Family"
                                                                 : "Random";
  auto& runs = manifest_.systems[system];
  if (method == ClusterMethod::kRandom) {
    std::erase_if(runs, [&](const SystemRun& r) { return r.seed == used_seed; });
    runs.push_back(SystemRun{a, used_seed});
    std::sort(runs.begin(), runs.end(),
              [](const SystemRun& x, const SystemRun& y) { return x.seed < y.seed; });
  } else {
    runs = {SystemRun{a, 0}};
  }
  const std::string name = system == "Random" ? "clusters/random.seed" + std::to_string(used_seed) + ".json"
                                              : "clusters/" + std::string(to_string(method)) + ".json";
  write_file(artifact(name), assignment_to_json(a) + "\n");
  save_manifest();
  return a;
}

void Experiment::run_cluster_training(const ClusterAssignment& assignment) {
  assignment.validate();
  for (const auto& members : assignment.members()) train_cluster(members);
  save_manifest();
}

void Experiment::run_cluster_training(const std::string& system) {
  const auto it = manifest_.systems.find(system);
  if (it == manifest_.systems.end() || it->second.empty()) {
    fail(ErrorKind::kInput, "no clustering recorded for system " + system);
  }
  for (const auto& run : it->second) run_cluster_training(run.assignment);
}

std::vector<std::string> Experiment::translate_cached(const std::string& key, const std::string& code,
                                                      const std::string& split,
                                                      const std::string& checkpoint) {
  const auto path = artifact("translations/" + key + "/" + code + "." + split + ".txt");
  if (fs::exists(path)) return read_lines(path);
  const auto entries = manifest_entries(split);
  const auto it = std::find_if(entries.begin(), entries.end(),
                               [&](const ManifestEntry& e) { return e.lang_code == code; });
  if (it == entries.end()) fail(ErrorKind::kLookup, split + " manifest has no corpus for " + code);
  const bool flip = (it->direction == Direction::kToPivot) !=
                    (config_.direction == TranslationDirection::kManyToOne);
  std::vector<std::string> sources;
  for (auto& [s, t] : read_parallel_text(it->path)) sources.push_back(flip ? t : s);
  const auto model = TransformerModel::load(checkpoint);
  const auto hyps = translate_lines(model, vocabulary(), codec(), code, sources, config_.beam);
  std::string text;
  for (const auto& h : hyps) text += h + "\n";
  write_file(path, text);
  return hyps;
}

ComparisonTable Experiment::run_evaluation(const std::string& split) {
  const auto& codes = languages();
  const auto entries = manifest_entries(split);
  for (const auto& system : kSystems) {
    const auto sit = manifest_.systems.find(system);
    if (sit == manifest_.systems.end()) continue;
    auto& by_lang = manifest_.scores[system];
    by_lang.clear();
    for (const auto& code : codes) {
      const auto eit = std::find_if(entries.begin(), entries.end(),
                                    [&](const ManifestEntry& e) { return e.lang_code == code; });
      if (eit == entries.end()) continue;
      const bool flip = (eit->direction == Direction::kToPivot) !=
                        (config_.direction == TranslationDirection::kManyToOne);
      std::vector<std::string> refs;
      for (auto& [s, t] : read_parallel_text(eit->path)) refs.push_back(flip ? s : t);
      std::vector<ScoredCell> cells;
      for (const auto& run : sit->second) {
        const auto cluster = run.assignment.cluster_of(code);
        std::vector<std::string> members;
        for (std::size_t i = 0; i < run.assignment.codes.size(); ++i) {
          if (run.assignment.cluster[i] == cluster) members.push_back(run.assignment.codes[i]);
        }
        const auto key = model_key(members);
        const auto ckpt = artifact("models/" + key + ".bin");
        if (!fs::exists(ckpt)) {
          log_warning("no checkpoint for " + key + "; " + system + "/" + code + " left missing");
          cells.clear();
          break;
        }
        manifest_.checkpoints[key] = "models/" + key + ".bin";
        const auto hyps = translate_cached(key, code, split, ckpt);
        ScoredCell cell;
        cell.report = corpus_bleu_text(hyps, refs);
        cell.checkpoint = "models/" + key + ".bin";
        cell.test_file = eit->path;
        cell.hypotheses = "translations/" + key + "/" + code + "." + split + ".txt";
        cells.push_back(std::move(cell));
      }
      if (!cells.empty()) by_lang[code] = std::move(cells);
    }
  }
  save_manifest();
  return comparison();
}

ComparisonTable Experiment::comparison() const {
  ComparisonTable t;
  t.languages = languages_.empty() ? std::vector<std::string>{} : languages_;
  if (t.languages.empty()) {
    std::set<std::string> codes;
    for (const auto& e : load_manifest(config_.train_manifest)) codes.insert(e.lang_code);
    t.languages.assign(codes.begin(), codes.end());
  }
  for (const auto& system : kSystems) {
    if (!manifest_.systems.count(system)) continue;
    t.systems.push_back(system);
    const auto sit = manifest_.scores.find(system);
    if (sit == manifest_.scores.end()) continue;
    for (const auto& [lang, cells] : sit->second) {
      double sum = 0.0;
      for (const auto& c : cells) sum += c.report.bleu;
      t.cells[system][lang] = sum / static_cast<double>(cells.size());
    }
  }
  return t;
}

std::string Experiment::report() {
  std::ostringstream out;
  out << "run " << hash_ << " (" << run_dir_ << ")\n";
  out << "direction " << to_string(config_.direction) << ", " << languages().size() << " languages, "
      << config_.steps << " steps, B=" << config_.tokens_per_lang << "\n\n";
  for (const auto& system : kSystems) {
    const auto it = manifest_.systems.find(system);
    if (it == manifest_.systems.end()) continue;
    for (const auto& run : it->second) {
      out << system;
      if (system == "Random") out << " (seed " << run.seed << ")";
      out << ": K=" << run.assignment.k << " ";
      for (const auto& members : run.assignment.members()) out << "{" << joined(members, ' ') << "} ";
      out << "\n";
    }
  }
  out << "\nBLEU (" << config_.eval_split << ", beam " << config_.beam.beam_size << ", alpha "
      << format_double(config_.beam.alpha) << ", * = best per language)\n\n";
  out << comparison().to_markdown();
  out << "\nReference (published), not reproduced: IWSLT-scale numbers for side-by-side reading only.\n";
  const std::string wanted = config_.direction == TranslationDirection::kManyToOne ? "many_to_one" : "one_to_many";
  for (const auto& table : published_tables()) {
    if (table.id.rfind(wanted, 0) != 0) continue;
    ComparisonTable ref;
    ref.languages = table.languages;
    for (const auto& [system, values] : table.rows) {
      ref.systems.push_back(system);
      for (std::size_t i = 0; i < values.size(); ++i) ref.cells[system][table.languages[i]] = values[i];
    }
    out << "\n" << table.caption << " (reference (published), not reproduced)\n\n" << ref.to_markdown();
  }
  return out.str();
}

std::vector<std::string> translate_lines(const TransformerModel& model, const Vocabulary& vocab,
                                         const BpeCodec& codec, const std::string& lang,
                                         const std::vector<std::string>& sources,
                                         const BeamConfig& beam) {
  const auto lang_id = model.lang_index(lang);
  std::vector<std::string> out;
  out.reserve(sources.size());
  for (const auto& line : sources) {
    auto src = vocab.encode(line, codec);
    if (src.empty()) {
      out.emplace_back();
      continue;
    }
    if (src.size() > model.config().max_len) src.resize(model.config().max_len);
    BeamConfig cfg = beam;
    cfg.max_decode_len = std::min(cfg.max_decode_len, model.config().max_len - 1);
    const auto ids = beam_search(model, src, lang_id, cfg, vocab.num_reserved());
    out.push_back(vocab.decode(ids));
  }
  return out;
}

}  // namespace langclust
