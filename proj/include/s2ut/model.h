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

#ifndef S2UT_MODEL_H_
#define S2UT_MODEL_H_

#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "s2ut/autograd.h"
#include "s2ut/ctc.h"
#include "s2ut/ops.h"
#include "s2ut/unit.h"

namespace s2ut {

enum class ModelVariant { kNar, kAr };

const char* to_string(ModelVariant v);
ModelVariant parse_variant(const std::string& s);

struct ModelConfig {
  int encoder_layers = 2;
  int decoder_layers = 2;
  int d_model = 64;
  int heads = 4;
  int ffn_dim = 256;
  int conv_kernel = 7;  // depthwise kernel in the encoder layers, odd
  int upsample = 2;     // decoder length T = upsample * encoder length
  int num_units = 16;
  int feature_dim = 8;
  int max_positions = 1024;
  double dropout = 0.1;
  ModelVariant variant = ModelVariant::kNar;

  void validate() const;

  // key=value lines, the checkpoint's config block.
  std::string to_text() const;
  static ModelConfig from_text(const std::string& text);

  bool operator==(const ModelConfig&) const = default;
};

// N x feature_dim source frames.
struct FeatureSequence {
  Tensor frames;

  std::size_t length() const { return frames.rows(); }
};

// Encoder output length for N input frames: two stride-2 convolutions.
inline std::size_t subsampled_length(std::size_t frames) { return frames / 4; }

// Named parameter registry. Iteration order is registration order.
class ParameterStore {
 public:
  Var add(const std::string& name, Tensor init);

  std::vector<Parameter>& all() { return params_; }
  const std::vector<Parameter>& all() const { return params_; }
  const Parameter* find(const std::string& name) const;
  Parameter* find(const std::string& name);
  std::size_t count() const { return params_.size(); }
  std::size_t num_values() const;
  void zero_grad();

 private:
  std::vector<Parameter> params_;
  std::map<std::string, std::size_t> index_;
};

// Dropout is applied only when training is set.
struct ForwardContext {
  bool training = false;
  std::mt19937_64* rng = nullptr;
};

struct LinearLayer {
  Var w, b;
  Var operator()(const Var& x) const { return linear(x, w, b); }
};

struct NormLayer {
  Var gamma, beta;
  Var operator()(const Var& x) const { return layer_norm(x, gamma, beta); }
};

struct FeedForwardBlock {
  NormLayer norm;
  LinearLayer in, out;
};

// Self-attention, depthwise convolution, and feed-forward sub-blocks, each
// pre-normalized with a residual connection.
struct ConformerLayer {
  NormLayer attn_norm;
  AttentionWeights attn;
  NormLayer conv_norm;
  Var conv_w, conv_b;
  LinearLayer conv_out;
  FeedForwardBlock ffn;
  NormLayer final_norm;
};

struct DecoderLayer {
  NormLayer self_norm;
  AttentionWeights self_attn;
  NormLayer cross_norm;
  AttentionWeights cross_attn;
  FeedForwardBlock ffn;
};

class SpeechEncoder {
 public:
  SpeechEncoder(const ModelConfig& cfg, ParameterStore& store, std::mt19937_64& init);

  // Two stride-2 convolutions with GELU: N frames -> floor(N/4) rows.
  Var subsample(const Var& frames) const;
  Var forward(const Var& frames, ForwardContext& ctx) const;

 private:
  ModelConfig cfg_;
  Var sub1_w_, sub1_b_, sub2_w_, sub2_b_;
  Var positions_;
  std::vector<ConformerLayer> layers_;
  NormLayer out_norm_;
};

struct DecodeResult {
  UnitSequence units;
  std::size_t decoder_passes = 0;
  // Symbols emitted by the decoder, counting a terminating end-of-sequence.
  std::size_t output_length = 0;
  bool truncated = false;
};

class S2utModel {
 public:
  explicit S2utModel(const ModelConfig& cfg, std::uint64_t seed);
  virtual ~S2utModel() = default;
  S2utModel(const S2utModel&) = delete;
  S2utModel& operator=(const S2utModel&) = delete;

  const ModelConfig& config() const { return cfg_; }
  ParameterStore& parameters() { return store_; }
  const ParameterStore& parameters() const { return store_; }

  // H, the encoder output: (floor(N/4), d_model).
  Var encode(const FeatureSequence& x, ForwardContext& ctx) const;

  // Full inference path, no gradient tracking.
  virtual DecodeResult decode(const FeatureSequence& x) const = 0;

 protected:
  ModelConfig cfg_;
  ParameterStore store_;
  std::mt19937_64 init_rng_;
  std::unique_ptr<SpeechEncoder> encoder_;
};

// Parallel CTC decoder over the upsampled encoder states.
class NarModel : public S2utModel {
 public:
  explicit NarModel(const ModelConfig& cfg, std::uint64_t seed = 1);

  // Row i is encoder row floor(i / upsample). Positional encodings are added
  // later, inside decode_log_probs, so glancing replaces raw rows.
  Var decoder_input(const Var& h) const;

  // (T, K+1) log-probabilities from one decoder pass.
  Var decode_log_probs(const Var& e, const Var& h, ForwardContext& ctx) const;

  // Encode, upsample, one decoder pass, argmax, collapse.
  DecodeResult decode(const FeatureSequence& x) const override;
  LogProbLattice lattice(const FeatureSequence& x) const;

  // (K+1, d_model) embeddings used for glancing, blank in the last row.
  const Var& token_embeddings() const { return token_embeddings_; }

  // Testing hook: zero the decoder positional encodings.
  void zero_decoder_positions();

 private:
  Var positions_;
  Var token_embeddings_;
  std::vector<DecoderLayer> layers_;
  NormLayer out_norm_;
  LinearLayer proj_;
};

// Autoregressive unit decoder. Output ids: units 0..K-1, K unused (blank
// slot, keeps ids aligned with the CTC model), K+1 end-of-sequence. The
// same id K+1 starts every decoder input.
class ArModel : public S2utModel {
 public:
  explicit ArModel(const ModelConfig& cfg, std::uint64_t seed = 1);

  int eos() const { return cfg_.num_units + 1; }
  int output_size() const { return cfg_.num_units + 2; }

  // Causal decoder over [eos, prefix...]; (len+1, K+2) log-probabilities.
  Var decode_log_probs(std::span<const int> prefix, const Var& h, ForwardContext& ctx) const;

  // Next-symbol distribution after the prefix. Stateless: the whole prefix
  // is re-run through the decoder on every call.
  Tensor decode_step(const UnitSequence& prefix, const Var& h) const;

  // Teacher-forced negative log-likelihood of y followed by end-of-sequence.
  Var sequence_nll(const UnitSequence& y, const Var& h, ForwardContext& ctx) const;

  // Greedy search until end-of-sequence or 2 * T symbols, T = upsample * N'.
  DecodeResult decode(const FeatureSequence& x) const override;

 private:
  Var positions_;
  Var token_embeddings_;
  std::vector<DecoderLayer> layers_;
  NormLayer out_norm_;
  LinearLayer proj_;
};

// Throws ConfigError naming the first encoder field that differs.
void require_same_encoder(const ModelConfig& a, const ModelConfig& b);

// Copies every encoder.* parameter by name. Throws ConfigError naming the
// first encoder field that differs.
void transfer_encoder(const S2utModel& from, S2utModel& to);

// Copies parameter values between stores with identical names and shapes.
void copy_parameters(const ParameterStore& from, ParameterStore& to);

// Checkpoint file: "CS2U", format version, config block, then one record
// per parameter (name, shape, little-endian float64 values).
inline constexpr std::uint32_t kCheckpointVersion = 1;
void save_checkpoint(const S2utModel& model, const std::string& path);
ModelConfig read_checkpoint_config(const std::string& path);
// Throws ConfigError when the stored config differs from the model's.
void load_checkpoint(S2utModel& model, const std::string& path);

}  // namespace s2ut

#endif  // S2UT_MODEL_H_
