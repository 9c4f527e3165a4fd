// Copyright 2026 The s2ut Authors
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

#include "s2ut/model.h"

#include <cmath>
#include <sstream>
#include <utility>

#include "s2ut/error.h"

namespace s2ut {

namespace {

Tensor uniform(Shape shape, double bound, std::mt19937_64& rng) {
  Tensor t(std::move(shape));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& v : t.data()) v = dist(rng);
  return t;
}

Var weight(ParameterStore& store, const std::string& name, Shape shape,
           std::size_t fan_in, std::mt19937_64& rng) {
  return store.add(name, uniform(std::move(shape), 1.0 / std::sqrt(double(fan_in)), rng));
}

Var zeros(ParameterStore& store, const std::string& name, std::size_t n) {
  return store.add(name, Tensor({n}, 0.0));
}

LinearLayer make_linear(ParameterStore& store, const std::string& name,
                        std::size_t in, std::size_t out, std::mt19937_64& rng) {
  return {weight(store, name + ".w", {in, out}, in, rng), zeros(store, name + ".b", out)};
}

NormLayer make_norm(ParameterStore& store, const std::string& name, std::size_t d) {
  return {store.add(name + ".gamma", Tensor({d}, 1.0)), zeros(store, name + ".beta", d)};
}

// The key bias is left out: softmax is invariant to it.
AttentionWeights make_attention(ParameterStore& store, const std::string& name,
                                std::size_t d, std::mt19937_64& rng) {
  AttentionWeights w;
  w.wq = weight(store, name + ".wq", {d, d}, d, rng);
  w.bq = zeros(store, name + ".bq", d);
  w.wk = weight(store, name + ".wk", {d, d}, d, rng);
  w.wv = weight(store, name + ".wv", {d, d}, d, rng);
  w.bv = zeros(store, name + ".bv", d);
  w.wo = weight(store, name + ".wo", {d, d}, d, rng);
  w.bo = zeros(store, name + ".bo", d);
  return w;
}

FeedForwardBlock make_ffn(ParameterStore& store, const std::string& name,
                          std::size_t d, std::size_t hidden, std::mt19937_64& rng) {
  return {make_norm(store, name + ".norm", d), make_linear(store, name + ".in", d, hidden, rng),
          make_linear(store, name + ".out", hidden, d, rng)};
}

DecoderLayer make_decoder_layer(ParameterStore& store, const std::string& name,
                                const ModelConfig& cfg, std::mt19937_64& rng) {
  const std::size_t d = cfg.d_model;
  DecoderLayer l;
  l.self_norm = make_norm(store, name + ".self_norm", d);
  l.self_attn = make_attention(store, name + ".self_attn", d, rng);
  l.cross_norm = make_norm(store, name + ".cross_norm", d);
  l.cross_attn = make_attention(store, name + ".cross_attn", d, rng);
  l.ffn = make_ffn(store, name + ".ffn", d, cfg.ffn_dim, rng);
  return l;
}

Var maybe_dropout(const Var& x, const ModelConfig& cfg, ForwardContext& ctx) {
  if (!ctx.training || cfg.dropout <= 0.0) return x;
  if (ctx.rng == nullptr) throw ConfigError("training forward pass needs a dropout rng");
  return dropout(x, cfg.dropout, *ctx.rng);
}

Var feed_forward(const FeedForwardBlock& f, const Var& x, const ModelConfig& cfg,
                 ForwardContext& ctx) {
  return f.out(maybe_dropout(gelu(f.in(f.norm(x))), cfg, ctx));
}

Var add_positions(const Var& x, const Var& table, const char* where) {
  const std::size_t n = x->value.rows();
  if (n > table->value.rows()) {
    throw ShapeError(std::string(where) + " length " + std::to_string(n) +
                     " exceeds max_positions " + std::to_string(table->value.rows()));
  }
  return add(x, slice_rows(table, 0, n));
}

Var decoder_stack(const std::vector<DecoderLayer>& layers, Var x, const Var& h,
                  bool causal, const ModelConfig& cfg, ForwardContext& ctx) {
  for (const DecoderLayer& l : layers) {
    Var n = l.self_norm(x);
    x = add(x, maybe_dropout(attention_block(n, n, l.self_attn, cfg.heads, causal), cfg, ctx));
    n = l.cross_norm(x);
    x = add(x, maybe_dropout(attention_block(n, h, l.cross_attn, cfg.heads, false), cfg, ctx));
    x = add(x, maybe_dropout(feed_forward(l.ffn, x, cfg, ctx), cfg, ctx));
  }
  return x;
}

Var feature_var(const FeatureSequence& x, const ModelConfig& cfg) {
  if (x.frames.rank() != 2 || x.frames.cols() != static_cast<std::size_t>(cfg.feature_dim)) {
    throw ShapeError("features " + x.frames.shape_str() + " do not have V_feat=" +
                     std::to_string(cfg.feature_dim) + " columns");
  }
  if (x.length() < 4) {
    throw ShapeError("feature sequence has " + std::to_string(x.length()) +
                     " frames, need at least 4");
  }
  if (!x.frames.all_finite()) throw RangeError("feature sequence has non-finite values");
  return constant(x.frames);
}

}  // namespace

const char* to_string(ModelVariant v) { return v == ModelVariant::kNar ? "nar" : "ar"; }

ModelVariant parse_variant(const std::string& s) {
  if (s == "nar" || s == "NAR") return ModelVariant::kNar;
  if (s == "ar" || s == "AR") return ModelVariant::kAr;
  throw ConfigError("unknown model variant '" + s + "'");
}

void ModelConfig::validate() const {
  auto need = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  need(encoder_layers >= 1, "L_e must be >= 1");
  need(decoder_layers >= 1, "L_d must be >= 1");
  need(d_model >= 1 && heads >= 1, "d_model and heads must be positive");
  need(d_model % heads == 0, "d_model " + std::to_string(d_model) +
                                 " is not divisible by heads " + std::to_string(heads));
  need(ffn_dim >= 1, "ffn_dim must be >= 1");
  need(conv_kernel >= 1 && conv_kernel % 2 == 1, "conv_kernel must be odd and positive");
  need(upsample >= 1, "lambda must be >= 1");
  need(num_units >= 1, "K must be >= 1");
  need(feature_dim >= 1, "V_feat must be >= 1");
  need(max_positions >= 1, "max_positions must be >= 1");
  need(dropout >= 0.0 && dropout < 1.0, "dropout must be in [0, 1)");
}

std::string ModelConfig::to_text() const {
  std::ostringstream os;
  os.precision(17);
  os << "L_e=" << encoder_layers << "\nL_d=" << decoder_layers << "\nd_model=" << d_model
     << "\nheads=" << heads << "\nffn_dim=" << ffn_dim << "\nconv_kernel=" << conv_kernel
     << "\nlambda=" << upsample << "\nK=" << num_units << "\nV_feat=" << feature_dim
     << "\nmax_positions=" << max_positions << "\ndropout=" << dropout
     << "\nvariant=" << to_string(variant) << "\n";
  return os.str();
}

ModelConfig ModelConfig::from_text(const std::string& text) {
  ModelConfig cfg;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("malformed config line '" + line + "'");
    const std::string key = line.substr(0, eq);
    const std::string val = line.substr(eq + 1);
    try {
      if (key == "L_e") cfg.encoder_layers = std::stoi(val);
      else if (key == "L_d") cfg.decoder_layers = std::stoi(val);
      else if (key == "d_model") cfg.d_model = std::stoi(val);
      else if (key == "heads") cfg.heads = std::stoi(val);
      else if (key == "ffn_dim") cfg.ffn_dim = std::stoi(val);
      else if (key == "conv_kernel") cfg.conv_kernel = std::stoi(val);
      else if (key == "lambda") cfg.upsample = std::stoi(val);
      else if (key == "K") cfg.num_units = std::stoi(val);
      else if (key == "V_feat") cfg.feature_dim = std::stoi(val);
      else if (key == "max_positions") cfg.max_positions = std::stoi(val);
      else if (key == "dropout") cfg.dropout = std::stod(val);
      else if (key == "variant") cfg.variant = parse_variant(val);
      else throw ConfigError("unknown config key '" + key + "'");
    } catch (const std::logic_error&) {
      throw ConfigError("bad value for " + key + ": '" + val + "'");
    }
  }
  cfg.validate();
  return cfg;
}

Var ParameterStore::add(const std::string& name, Tensor init) {
  if (index_.count(name)) throw ConfigError("duplicate parameter " + name);
  index_[name] = params_.size();
  params_.emplace_back(name, std::move(init));
  return params_.back().var();
}

const Parameter* ParameterStore::find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &params_[it->second];
}

Parameter* ParameterStore::find(const std::string& name) {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &params_[it->second];
}

std::size_t ParameterStore::num_values() const {
  std::size_t n = 0;
  for (const Parameter& p : params_) n += p.value().size();
  return n;
}

void ParameterStore::zero_grad() {
  for (Parameter& p : params_) p.zero_grad();
}

SpeechEncoder::SpeechEncoder(const ModelConfig& cfg, ParameterStore& store,
                             std::mt19937_64& rng)
    : cfg_(cfg) {
  const std::size_t d = cfg.d_model;
  const std::size_t v = cfg.feature_dim;
  sub1_w_ = weight(store, "encoder.subsample.conv1.w", {4, v, d}, 4 * v, rng);
  sub1_b_ = zeros(store, "encoder.subsample.conv1.b", d);
  sub2_w_ = weight(store, "encoder.subsample.conv2.w", {4, d, d}, 4 * d, rng);
  sub2_b_ = zeros(store, "encoder.subsample.conv2.b", d);
  positions_ = store.add("encoder.positions",
                         uniform({std::size_t(cfg.max_positions), d}, 0.1, rng));
  for (int i = 0; i < cfg.encoder_layers; ++i) {
    const std::string p = "encoder.layers." + std::to_string(i);
    ConformerLayer l;
    l.attn_norm = make_norm(store, p + ".attn_norm", d);
    l.attn = make_attention(store, p + ".attn", d, rng);
    l.conv_norm = make_norm(store, p + ".conv_norm", d);
    l.conv_w = weight(store, p + ".conv.w", {std::size_t(cfg.conv_kernel), d},
                      cfg.conv_kernel, rng);
    l.conv_b = zeros(store, p + ".conv.b", d);
    l.conv_out = make_linear(store, p + ".conv_out", d, d, rng);
    l.ffn = make_ffn(store, p + ".ffn", d, cfg.ffn_dim, rng);
    l.final_norm = make_norm(store, p + ".final_norm", d);
    layers_.push_back(std::move(l));
  }
  out_norm_ = make_norm(store, "encoder.out_norm", d);
}

Var SpeechEncoder::subsample(const Var& frames) const {
  if (frames->value.rows() < 4) {
    throw ShapeError("subsample needs at least 4 frames, got " +
                     std::to_string(frames->value.rows()));
  }
  Var x = gelu(conv1d(frames, sub1_w_, sub1_b_, 2, 1));
  return gelu(conv1d(x, sub2_w_, sub2_b_, 2, 1));
}

Var SpeechEncoder::forward(const Var& frames, ForwardContext& ctx) const {
  Var x = maybe_dropout(add_positions(subsample(frames), positions_, "encoder"), cfg_, ctx);
  const std::size_t pad = (cfg_.conv_kernel - 1) / 2;
  for (const ConformerLayer& l : layers_) {
    Var n = l.attn_norm(x);
    x = add(x, maybe_dropout(attention_block(n, n, l.attn, cfg_.heads, false), cfg_, ctx));
    Var c = gelu(depthwise_conv1d(l.conv_norm(x), l.conv_w, l.conv_b, pad));
    x = add(x, maybe_dropout(l.conv_out(c), cfg_, ctx));
    x = add(x, maybe_dropout(feed_forward(l.ffn, x, cfg_, ctx), cfg_, ctx));
    x = l.final_norm(x);
  }
  return out_norm_(x);
}

S2utModel::S2utModel(const ModelConfig& cfg, std::uint64_t seed) : cfg_(cfg), init_rng_(seed) {
  cfg_.validate();
  encoder_ = std::make_unique<SpeechEncoder>(cfg_, store_, init_rng_);
}

Var S2utModel::encode(const FeatureSequence& x, ForwardContext& ctx) const {
  return encoder_->forward(feature_var(x, cfg_), ctx);
}

NarModel::NarModel(const ModelConfig& cfg, std::uint64_t seed) : S2utModel(cfg, seed) {
  if (cfg_.variant != ModelVariant::kNar) throw ConfigError("NarModel needs variant nar");
  const std::size_t d = cfg_.d_model;
  const std::size_t v = cfg_.num_units + 1;
  positions_ = store_.add("decoder.positions",
                          uniform({std::size_t(cfg_.max_positions), d}, 0.1, init_rng_));
  token_embeddings_ = store_.add("decoder.token_embeddings", uniform({v, d}, 1.0, init_rng_));
  for (int i = 0; i < cfg_.decoder_layers; ++i) {
    layers_.push_back(
        make_decoder_layer(store_, "decoder.layers." + std::to_string(i), cfg_, init_rng_));
  }
  out_norm_ = make_norm(store_, "decoder.out_norm", d);
  proj_ = make_linear(store_, "decoder.proj", d, v, init_rng_);
}

Var NarModel::decoder_input(const Var& h) const { return upsample_rows(h, cfg_.upsample); }

Var NarModel::decode_log_probs(const Var& e, const Var& h, ForwardContext& ctx) const {
  if (e->value.rank() != 2 || e->value.cols() != std::size_t(cfg_.d_model) ||
      h->value.rank() != 2 || h->value.cols() != std::size_t(cfg_.d_model)) {
    throw ShapeError("decoder input " + e->value.shape_str() + " / memory " +
                     h->value.shape_str() + " do not have width d_model");
  }
  Var x = maybe_dropout(add_positions(e, positions_, "decoder"), cfg_, ctx);
  x = decoder_stack(layers_, x, h, false, cfg_, ctx);
  return log_softmax(proj_(out_norm_(x)), 1);
}

LogProbLattice NarModel::lattice(const FeatureSequence& x) const {
  NoGradGuard no_grad;
  ForwardContext ctx;
  Var h = encode(x, ctx);
  return LogProbLattice(decode_log_probs(decoder_input(h), h, ctx)->value);
}

DecodeResult NarModel::decode(const FeatureSequence& x) const {
  const LogProbLattice lat = lattice(x);
  DecodeResult r;
  r.units = greedy_decode(lat);
  r.decoder_passes = 1;
  r.output_length = lat.length();
  return r;
}

void NarModel::zero_decoder_positions() { positions_->value.fill(0.0); }

ArModel::ArModel(const ModelConfig& cfg, std::uint64_t seed) : S2utModel(cfg, seed) {
  if (cfg_.variant != ModelVariant::kAr) throw ConfigError("ArModel needs variant ar");
  const std::size_t d = cfg_.d_model;
  const std::size_t v = output_size();
  positions_ = store_.add("decoder.positions",
                          uniform({std::size_t(cfg_.max_positions), d}, 0.1, init_rng_));
  token_embeddings_ = store_.add("decoder.token_embeddings", uniform({v, d}, 1.0, init_rng_));
  for (int i = 0; i < cfg_.decoder_layers; ++i) {
    layers_.push_back(
        make_decoder_layer(store_, "decoder.layers." + std::to_string(i), cfg_, init_rng_));
  }
  out_norm_ = make_norm(store_, "decoder.out_norm", d);
  proj_ = make_linear(store_, "decoder.proj", d, v, init_rng_);
}

Var ArModel::decode_log_probs(std::span<const int> prefix, const Var& h,
                              ForwardContext& ctx) const {
  std::vector<int> input;
  input.reserve(prefix.size() + 1);
  input.push_back(eos());
  for (int u : prefix) {
    if (u < 0 || u >= cfg_.num_units) {
      throw RangeError("prefix unit " + std::to_string(u) + " outside [0, " +
                       std::to_string(cfg_.num_units) + ")");
    }
    input.push_back(u);
  }
  Var x = embedding_lookup(token_embeddings_, input);
  x = maybe_dropout(add_positions(x, positions_, "decoder"), cfg_, ctx);
  x = decoder_stack(layers_, x, h, true, cfg_, ctx);
  return log_softmax(proj_(out_norm_(x)), 1);
}

Tensor ArModel::decode_step(const UnitSequence& prefix, const Var& h) const {
  NoGradGuard no_grad;
  ForwardContext ctx;
  Var lp = decode_log_probs(prefix.units, h, ctx);
  const std::size_t last = lp->value.rows() - 1;
  Tensor p({std::size_t(output_size())});
  for (int v = 0; v < output_size(); ++v) p[v] = std::exp(lp->value(last, v));
  return p;
}

Var ArModel::sequence_nll(const UnitSequence& y, const Var& h, ForwardContext& ctx) const {
  Var lp = decode_log_probs(y.units, h, ctx);
  std::vector<int> targets = y.units;
  targets.push_back(eos());
  return nll_loss(lp, targets);
}

DecodeResult ArModel::decode(const FeatureSequence& x) const {
  NoGradGuard no_grad;
  ForwardContext ctx;
  Var h = encode(x, ctx);
  const std::size_t cap = 2 * std::size_t(cfg_.upsample) * h->value.rows();
  DecodeResult r;
  while (true) {
    if (r.units.units.size() >= cap) {
      r.truncated = true;
      break;
    }
    Var lp = decode_log_probs(r.units.units, h, ctx);
    ++r.decoder_passes;
    ++r.output_length;
    // The blank slot is never a target, so it is excluded from the argmax.
    const auto row = lp->value.row(lp->value.rows() - 1);
    int next = eos();
    for (int v = 0; v < cfg_.num_units; ++v) {
      if (row[v] > row[next]) next = v;
    }
    if (next == eos()) break;
    r.units.units.push_back(next);
  }
  return r;
}

void copy_parameters(const ParameterStore& from, ParameterStore& to) {
  if (from.count() != to.count()) {
    throw ConfigError("parameter count differs: " + std::to_string(from.count()) + " vs " +
                      std::to_string(to.count()));
  }
  for (const Parameter& p : from.all()) {
    Parameter* q = to.find(p.name());
    if (q == nullptr) throw ConfigError("missing parameter " + p.name());
    if (q->value().shape() != p.value().shape()) {
      throw ShapeError("parameter " + p.name() + " shape " + p.value().shape_str() +
                       " vs " + q->value().shape_str());
    }
    q->var()->value = p.value();
  }
}

void require_same_encoder(const ModelConfig& a, const ModelConfig& b) {
  auto check = [](const char* field, auto x, auto y) {
    if (x != y) {
      throw ConfigError("encoder config mismatch on " + std::string(field) + ": " +
                        std::to_string(x) + " vs " + std::to_string(y));
    }
  };
  check("L_e", a.encoder_layers, b.encoder_layers);
  check("d_model", a.d_model, b.d_model);
  check("heads", a.heads, b.heads);
  check("conv_kernel", a.conv_kernel, b.conv_kernel);
  check("V_feat", a.feature_dim, b.feature_dim);
  check("ffn_dim", a.ffn_dim, b.ffn_dim);
  check("max_positions", a.max_positions, b.max_positions);
}

void transfer_encoder(const S2utModel& from, S2utModel& to) {
  require_same_encoder(from.config(), to.config());
  const std::string prefix = "encoder.";
  std::size_t copied = 0;
  for (const Parameter& p : from.parameters().all()) {
    if (p.name().rfind(prefix, 0) != 0) continue;
    const Parameter* q = to.parameters().find(p.name());
    if (q == nullptr) throw ConfigError("target model has no parameter " + p.name());
    if (q->value().shape() != p.value().shape()) {
      throw ShapeError("parameter " + p.name() + " shape " + p.value().shape_str() +
                       " vs " + q->value().shape_str());
    }
    q->var()->value = p.value();
    ++copied;
  }
  std::size_t expected = 0;
  for (const Parameter& q : to.parameters().all()) {
    if (q.name().rfind(prefix, 0) == 0) ++expected;
  }
  if (copied != expected) {
    throw ConfigError("encoder transfer matched " + std::to_string(copied) + " of " +
                      std::to_string(expected) + " parameters");
  }
}

}  // namespace s2ut
