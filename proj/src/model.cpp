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

#include "langclust/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <json.hpp>

#include "langclust/error.hpp"

namespace langclust {
namespace {

constexpr double kMaskValue = -1e9;
constexpr char kCheckpointMagic[8] = {'L', 'C', 'L', 'U', 'S', 'T', 'C', 'K'};
constexpr std::uint32_t kCheckpointVersion = 1;

Tensor uniform_tensor(Shape shape, double limit, Rng& rng) {
  Tensor t(std::move(shape));
  for (auto& v : t.data()) v = rng.uniform(-limit, limit);
  return t;
}

}  // namespace

void ModelConfig::validate() const {
  if (d_model == 0 || d_ff == 0 || num_layers == 0 || num_heads == 0 || vocab_size == 0 ||
      max_len == 0 || lang_emb_dim == 0) {
    fail(ErrorKind::kInput, "model config: all sizes must be positive");
  }
  if (d_model % num_heads != 0) {
    fail(ErrorKind::kInput, "model config: d_model must be divisible by num_heads");
  }
  if (lang_emb_dim != d_model) {
    fail(ErrorKind::kInput, "model config: lang_emb_dim must equal d_model");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    fail(ErrorKind::kInput, "model config: dropout must lie in [0, 1)");
  }
}

struct TransformerModel::Padded {
  std::size_t batch = 0, src_len = 0, tgt_len = 0;
  std::vector<TokenId> src;      // [batch*src_len]
  std::vector<std::size_t> lang; // per source position
  std::vector<TokenId> tgt_in;   // [batch*tgt_len]
  std::vector<TokenId> tgt_out;  // PAD marks ignored positions
  std::vector<std::size_t> src_lengths, tgt_lengths;
};

TransformerModel::TransformerModel(ModelConfig config, std::vector<std::string> lang_codes,
                                   std::uint64_t seed)
    : config_(config), languages_(std::move(lang_codes)) {
  config_.validate();
  std::sort(languages_.begin(), languages_.end());
  if (languages_.empty()) fail(ErrorKind::kInput, "model needs at least one language");
  if (std::adjacent_find(languages_.begin(), languages_.end()) != languages_.end()) {
    fail(ErrorKind::kInput, "duplicate language code");
  }
  Rng rng(seed);
  const std::size_t d = config_.d_model, ff = config_.d_ff, v = config_.vocab_size;
  auto matrix = [&](const std::string& name, std::size_t in, std::size_t out) {
    add_param(name, uniform_tensor({in, out}, std::sqrt(1.0 / static_cast<double>(in)), rng));
  };
  auto zeros = [&](const std::string& name, std::size_t n) { add_param(name, Tensor({n}, 0.0)); };
  auto ones = [&](const std::string& name, std::size_t n) { add_param(name, Tensor({n}, 1.0)); };
  auto attention_params = [&](const std::string& p) {
    for (const char* w : {"q", "k", "v", "o"}) {
      matrix(p + ".w" + w, d, d);
      zeros(p + ".b" + w, d);
    }
  };
  auto block = [&](const std::string& p, bool decoder) {
    ones(p + ".ln1.g", d);
    zeros(p + ".ln1.b", d);
    attention_params(p + ".self");
    ones(p + ".ln2.g", d);
    zeros(p + ".ln2.b", d);
    if (decoder) {
      attention_params(p + ".cross");
      ones(p + ".ln3.g", d);
      zeros(p + ".ln3.b", d);
    }
    matrix(p + ".ff.w1", d, ff);
    zeros(p + ".ff.b1", ff);
    matrix(p + ".ff.w2", ff, d);
    zeros(p + ".ff.b2", d);
  };
  add_param("tok_emb", uniform_tensor({v, d}, 0.1, rng));
  add_param("lang_emb", uniform_tensor({languages_.size(), config_.lang_emb_dim}, 0.1, rng));
  for (std::size_t l = 0; l < config_.num_layers; ++l) block("enc." + std::to_string(l), false);
  ones("enc.ln.g", d);
  zeros("enc.ln.b", d);
  for (std::size_t l = 0; l < config_.num_layers; ++l) block("dec." + std::to_string(l), true);
  ones("dec.ln.g", d);
  zeros("dec.ln.b", d);
  matrix("out.w", d, v);
  zeros("out.b", v);
}

Var& TransformerModel::add_param(const std::string& name, Tensor value) {
  names_.push_back(name);
  params_.emplace_back(std::move(value), true);
  return params_.back();
}

std::size_t TransformerModel::lang_index(std::string_view code) const {
  auto it = std::lower_bound(languages_.begin(), languages_.end(), code);
  if (it == languages_.end() || *it != code) {
    fail(ErrorKind::kLookup, "language '" + std::string(code) + "' is not registered");
  }
  return static_cast<std::size_t>(it - languages_.begin());
}

Var& TransformerModel::parameter(std::string_view name) {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return params_[i];
  }
  fail(ErrorKind::kLookup, "no parameter named " + std::string(name));
}

const Var& TransformerModel::parameter(std::string_view name) const {
  return const_cast<TransformerModel*>(this)->parameter(name);
}

void TransformerModel::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

Tensor TransformerModel::positional(std::size_t len) const {
  const std::size_t d = config_.d_model;
  Tensor pe({len, d});
  for (std::size_t pos = 0; pos < len; ++pos) {
    for (std::size_t i = 0; i < d; i += 2) {
      const double rate = std::pow(10000.0, -static_cast<double>(i) / static_cast<double>(d));
      pe[pos * d + i] = std::sin(static_cast<double>(pos) * rate);
      if (i + 1 < d) pe[pos * d + i + 1] = std::cos(static_cast<double>(pos) * rate);
    }
  }
  return pe;
}

Var TransformerModel::dropout(const Var& x, Rng* rng) const {
  if (rng == nullptr || config_.dropout <= 0.0) return x;
  const double keep = 1.0 - config_.dropout;
  Tensor mask(x.shape());
  for (auto& m : mask.data()) m = rng->uniform() < keep ? 1.0 / keep : 0.0;
  return ops::apply_mask(x, mask);
}

Var TransformerModel::norm(const std::string& prefix, const Var& x) const {
  return ops::layer_norm(x, parameter(prefix + ".g"), parameter(prefix + ".b"));
}

Var TransformerModel::feed_forward(const std::string& prefix, const Var& x, Rng* rng) const {
  Var h = ops::relu(ops::add(ops::matmul(x, parameter(prefix + ".w1")), parameter(prefix + ".b1")));
  h = dropout(h, rng);
  return ops::add(ops::matmul(h, parameter(prefix + ".w2")), parameter(prefix + ".b2"));
}

Var TransformerModel::attention(const std::string& prefix, const Var& query, const Var& keys,
                                std::size_t batch, std::size_t q_len, std::size_t k_len,
                                const Tensor& mask, Rng* rng, ForwardTrace* trace) const {
  const std::size_t d = config_.d_model, heads = config_.num_heads, dh = d / heads;
  static constexpr std::size_t kSplit[] = {0, 2, 1, 3};
  auto project = [&](const Var& x, const char* w, std::size_t len) {
    Var y = ops::add(ops::matmul(x, parameter(prefix + ".w" + w)), parameter(prefix + ".b" + w));
    y = ops::reshape(y, {batch, len, heads, dh});
    y = ops::permute(y, kSplit);
    return ops::reshape(y, {batch * heads, len, dh});
  };
  Var q = project(query, "q", q_len);
  Var k = project(keys, "k", k_len);
  Var v = project(keys, "v", k_len);
  Var scores = ops::scale(ops::bmm(q, k, true), 1.0 / std::sqrt(static_cast<double>(dh)));
  scores = ops::add(scores, Var(mask));
  Var probs = ops::softmax(scores, 2);
  if (trace) trace->attention.push_back(probs.value());
  probs = dropout(probs, rng);
  Var ctx = ops::bmm(probs, v);
  ctx = ops::reshape(ctx, {batch, heads, q_len, dh});
  ctx = ops::permute(ctx, kSplit);
  ctx = ops::reshape(ctx, {batch * q_len, d});
  return ops::add(ops::matmul(ctx, parameter(prefix + ".wo")), parameter(prefix + ".bo"));
}

Var TransformerModel::embed_source(const Padded& p, Rng* rng, ForwardTrace* trace) const {
  const std::size_t d = config_.d_model;
  Var tok = ops::scale(ops::embedding(parameter("tok_emb"), p.src), std::sqrt(static_cast<double>(d)));
  Var lang = ops::embedding(parameter("lang_emb"), p.lang);
  Var x = ops::reshape(ops::add(tok, lang), {p.batch, p.src_len, d});
  x = ops::add(x, Var(positional(p.src_len)));
  if (trace) trace->encoder_input = x.value();
  return dropout(ops::reshape(x, {p.batch * p.src_len, d}), rng);
}

Var TransformerModel::run_encoder(const Padded& p, Rng* rng, ForwardTrace* trace) const {
  const std::size_t heads = config_.num_heads, s = p.src_len;
  Tensor mask({p.batch * heads, s, s}, 0.0);
  for (std::size_t b = 0; b < p.batch; ++b) {
    for (std::size_t h = 0; h < heads; ++h) {
      double* m = mask.raw() + (b * heads + h) * s * s;
      for (std::size_t i = 0; i < s; ++i) {
        for (std::size_t j = p.src_lengths[b]; j < s; ++j) m[i * s + j] = kMaskValue;
      }
    }
  }
  Var x = embed_source(p, rng, trace);
  for (std::size_t l = 0; l < config_.num_layers; ++l) {
    const std::string pre = "enc." + std::to_string(l);
    Var h = norm(pre + ".ln1", x);
    x = ops::add(x, dropout(attention(pre + ".self", h, h, p.batch, s, s, mask, rng, trace), rng));
    h = norm(pre + ".ln2", x);
    x = ops::add(x, dropout(feed_forward(pre + ".ff", h, rng), rng));
  }
  return norm("enc.ln", x);
}

Var TransformerModel::run_decoder(const Var& memory, const Padded& p, Rng* rng,
                                  ForwardTrace* trace) const {
  const std::size_t d = config_.d_model, heads = config_.num_heads;
  const std::size_t t = p.tgt_len, s = p.src_len;
  Tensor self_mask({p.batch * heads, t, t}, 0.0);
  Tensor cross_mask({p.batch * heads, t, s}, 0.0);
  for (std::size_t b = 0; b < p.batch; ++b) {
    for (std::size_t h = 0; h < heads; ++h) {
      double* sm = self_mask.raw() + (b * heads + h) * t * t;
      double* cm = cross_mask.raw() + (b * heads + h) * t * s;
      for (std::size_t i = 0; i < t; ++i) {
        for (std::size_t j = 0; j < t; ++j) {
          if (j > i || j >= p.tgt_lengths[b]) sm[i * t + j] = kMaskValue;
        }
        for (std::size_t j = p.src_lengths[b]; j < s; ++j) cm[i * s + j] = kMaskValue;
      }
    }
  }
  Var y = ops::scale(ops::embedding(parameter("tok_emb"), p.tgt_in), std::sqrt(static_cast<double>(d)));
  y = ops::reshape(ops::add(ops::reshape(y, {p.batch, t, d}), Var(positional(t))), {p.batch * t, d});
  y = dropout(y, rng);
  for (std::size_t l = 0; l < config_.num_layers; ++l) {
    const std::string pre = "dec." + std::to_string(l);
    Var h = norm(pre + ".ln1", y);
    y = ops::add(y, dropout(attention(pre + ".self", h, h, p.batch, t, t, self_mask, rng, trace), rng));
    h = norm(pre + ".ln2", y);
    y = ops::add(y, dropout(attention(pre + ".cross", h, memory, p.batch, t, s, cross_mask, rng, trace), rng));
    h = norm(pre + ".ln3", y);
    y = ops::add(y, dropout(feed_forward(pre + ".ff", h, rng), rng));
  }
  y = norm("dec.ln", y);
  return ops::add(ops::matmul(y, parameter("out.w")), parameter("out.b"));
}

Tensor TransformerModel::encode(std::span<const TokenId> src, std::size_t lang,
                                ForwardTrace* trace) const {
  if (lang >= languages_.size()) {
    fail(ErrorKind::kLookup, "language id " + std::to_string(lang) + " is not registered");
  }
  if (src.empty()) fail(ErrorKind::kInput, "encode: empty source");
  NoGradGuard guard;
  Padded p;
  p.batch = 1;
  p.src_len = src.size();
  p.src.assign(src.begin(), src.end());
  p.lang.assign(src.size(), lang);
  p.src_lengths = {src.size()};
  return run_encoder(p, nullptr, trace).value();
}

Var TransformerModel::loss(std::span<const Example> batch, Rng* dropout_rng,
                           ForwardTrace* trace) const {
  if (batch.empty()) fail(ErrorKind::kInput, "loss: empty batch");
  Padded p;
  p.batch = batch.size();
  for (const auto& ex : batch) {
    if (ex.src.empty()) fail(ErrorKind::kInput, "loss: empty source sentence");
    if (ex.src.size() > config_.max_len || ex.tgt.size() + 1 > config_.max_len) {
      fail(ErrorKind::kInput, "loss: sentence longer than max_len " + std::to_string(config_.max_len));
    }
    if (ex.lang >= languages_.size()) {
      fail(ErrorKind::kLookup, "language id " + std::to_string(ex.lang) + " is not registered");
    }
    p.src_len = std::max(p.src_len, ex.src.size());
    p.tgt_len = std::max(p.tgt_len, ex.tgt.size() + 1);
  }
  p.src.assign(p.batch * p.src_len, Vocabulary::kPad);
  p.lang.assign(p.batch * p.src_len, 0);
  p.tgt_in.assign(p.batch * p.tgt_len, Vocabulary::kPad);
  p.tgt_out.assign(p.batch * p.tgt_len, Vocabulary::kPad);
  for (std::size_t b = 0; b < p.batch; ++b) {
    const auto& ex = batch[b];
    std::copy(ex.src.begin(), ex.src.end(), p.src.begin() + static_cast<long>(b * p.src_len));
    std::fill_n(p.lang.begin() + static_cast<long>(b * p.src_len), p.src_len, ex.lang);
    p.tgt_in[b * p.tgt_len] = Vocabulary::kBos;
    for (std::size_t i = 0; i < ex.tgt.size(); ++i) {
      p.tgt_in[b * p.tgt_len + i + 1] = ex.tgt[i];
      p.tgt_out[b * p.tgt_len + i] = ex.tgt[i];
    }
    p.tgt_out[b * p.tgt_len + ex.tgt.size()] = Vocabulary::kEos;
    p.src_lengths.push_back(ex.src.size());
    p.tgt_lengths.push_back(ex.tgt.size() + 1);
  }
  Var memory = run_encoder(p, dropout_rng, trace);
  Var logits = run_decoder(memory, p, dropout_rng, trace);
  return ops::cross_entropy(logits, p.tgt_out, Vocabulary::kPad);
}

Tensor TransformerModel::decoder_logits(std::span<const TokenId> src, std::size_t lang,
                                        std::span<const TokenId> tgt_in) const {
  NoGradGuard guard;
  Padded p;
  p.batch = 1;
  p.src_len = src.size();
  p.tgt_len = tgt_in.size();
  p.src.assign(src.begin(), src.end());
  p.lang.assign(src.size(), lang);
  p.tgt_in.assign(tgt_in.begin(), tgt_in.end());
  p.src_lengths = {src.size()};
  p.tgt_lengths = {tgt_in.size()};
  Var memory = run_encoder(p, nullptr, nullptr);
  return run_decoder(memory, p, nullptr, nullptr).value();
}

std::vector<std::vector<double>> TransformerModel::next_token_logprobs(
    const Tensor& memory, std::span<const TokenId> src,
    const std::vector<std::vector<TokenId>>& prefixes) const {
  NoGradGuard guard;
  const std::size_t nb = prefixes.size(), s = src.size(), d = config_.d_model;
  const std::size_t t = prefixes.empty() ? 1 : prefixes.front().size() + 1;
  Padded p;
  p.batch = nb;
  p.src_len = s;
  p.tgt_len = t;
  p.src_lengths.assign(nb, s);
  p.tgt_lengths.assign(nb, t);
  Tensor mem({nb * s, d});
  for (std::size_t b = 0; b < nb; ++b) {
    if (prefixes[b].size() + 1 != t) fail(ErrorKind::kInput, "prefixes must share one length");
    std::copy_n(memory.raw(), s * d, mem.raw() + b * s * d);
    p.tgt_in.push_back(Vocabulary::kBos);
    p.tgt_in.insert(p.tgt_in.end(), prefixes[b].begin(), prefixes[b].end());
  }
  Tensor logits = run_decoder(Var(std::move(mem)), p, nullptr, nullptr).value();
  const std::size_t v = config_.vocab_size;
  std::vector<std::vector<double>> out(nb, std::vector<double>(v));
  for (std::size_t b = 0; b < nb; ++b) {
    const double* row = logits.raw() + (b * t + t - 1) * v;
    const double mx = *std::max_element(row, row + v);
    double z = 0.0;
    for (std::size_t j = 0; j < v; ++j) z += std::exp(row[j] - mx);
    const double lse = mx + std::log(z);
    for (std::size_t j = 0; j < v; ++j) out[b][j] = row[j] - lse;
  }
  return out;
}

LanguageEmbeddingSet TransformerModel::extract_language_embeddings() const {
  return {languages_, parameter("lang_emb").value()};
}

void TransformerModel::save(const std::string& path, const std::string& vocab_ref) const {
  nlohmann::json header;
  header["config"] = {{"d_model", config_.d_model},     {"d_ff", config_.d_ff},
                      {"num_layers", config_.num_layers}, {"num_heads", config_.num_heads},
                      {"vocab_size", config_.vocab_size}, {"lang_emb_dim", config_.lang_emb_dim},
                      {"max_len", config_.max_len},       {"dropout", config_.dropout}};
  header["languages"] = languages_;
  header["vocabulary"] = vocab_ref;
  auto& tensors = header["parameters"] = nlohmann::json::array();
  for (std::size_t i = 0; i < params_.size(); ++i) {
    tensors.push_back({{"name", names_[i]}, {"shape", params_[i].shape()}});
  }
  const std::string text = header.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path);
  out.write(kCheckpointMagic, sizeof kCheckpointMagic);
  const std::uint32_t version = kCheckpointVersion;
  const auto length = static_cast<std::uint64_t>(text.size());
  out.write(reinterpret_cast<const char*>(&version), sizeof version);
  out.write(reinterpret_cast<const char*>(&length), sizeof length);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& p : params_) {
    out.write(reinterpret_cast<const char*>(p.value().raw()),
              static_cast<std::streamsize>(p.value().size() * sizeof(double)));
  }
  if (!out) fail(ErrorKind::kIo, "failed writing " + path);
}

TransformerModel TransformerModel::load(const std::string& path, std::string* vocab_ref) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot read " + path);
  char magic[8];
  std::uint32_t version = 0;
  std::uint64_t length = 0;
  in.read(magic, sizeof magic);
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  in.read(reinterpret_cast<char*>(&length), sizeof length);
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0) {
    fail(ErrorKind::kParse, path + ": not a checkpoint");
  }
  if (version != kCheckpointVersion) {
    fail(ErrorKind::kParse, path + ": unsupported checkpoint version " + std::to_string(version));
  }
  std::string text(length, '\0');
  in.read(text.data(), static_cast<std::streamsize>(length));
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    fail(ErrorKind::kParse, path + ": bad header: " + e.what());
  }
  ModelConfig cfg;
  std::vector<std::string> languages;
  try {
    const auto& c = header.at("config");
    cfg.d_model = c.at("d_model");
    cfg.d_ff = c.at("d_ff");
    cfg.num_layers = c.at("num_layers");
    cfg.num_heads = c.at("num_heads");
    cfg.vocab_size = c.at("vocab_size");
    cfg.lang_emb_dim = c.at("lang_emb_dim");
    cfg.max_len = c.at("max_len");
    cfg.dropout = c.at("dropout");
    languages = header.at("languages").get<std::vector<std::string>>();
    if (!header.at("parameters").is_array()) fail(ErrorKind::kParse, path + ": bad parameter list");
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kParse, path + ": bad header: " + e.what());
  }
  TransformerModel model(cfg, std::move(languages), 0);
  const auto& tensors = header.at("parameters");
  if (tensors.size() != model.params_.size()) fail(ErrorKind::kParse, path + ": parameter count mismatch");
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const auto name = tensors[i].value("name", std::string());
    if (name != model.names_[i] || tensors[i].value("shape", Shape{}) != model.params_[i].shape()) {
      fail(ErrorKind::kParse, path + ": unexpected parameter '" + name + "'");
    }
    auto& value = model.params_[i].mutable_value();
    in.read(reinterpret_cast<char*>(value.raw()),
            static_cast<std::streamsize>(value.size() * sizeof(double)));
  }
  if (!in) fail(ErrorKind::kParse, path + ": truncated parameter data");
  if (vocab_ref) *vocab_ref = header.value("vocabulary", "");
  return model;
}

}  // namespace langclust
