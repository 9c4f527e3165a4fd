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

#include "s2ut/config.h"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <functional>
#include <set>
#include <sstream>
#include <type_traits>

#include "s2ut/error.h"
#include "s2ut/io.h"

namespace s2ut {

namespace {

namespace pt = boost::property_tree;
using E = ExperimentConfig;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

template <typename T>
void parse_value(const std::string& key, const std::string& text, T& out) {
  const std::string v = trim(text);
  if constexpr (std::is_same_v<T, bool>) {
    if (v == "true" || v == "1" || v == "yes") out = true;
    else if (v == "false" || v == "0" || v == "no") out = false;
    else throw ConfigError("bad boolean for " + key + ": '" + v + "'");
  } else if constexpr (std::is_same_v<T, std::string>) {
    out = v;
  } else if constexpr (std::is_same_v<T, GlancePositions>) {
    if (v == "all") out = GlancePositions::kAll;
    else if (v == "mismatched") out = GlancePositions::kMismatched;
    else throw ConfigError("bad value for " + key + ": '" + v + "'");
  } else if constexpr (std::is_same_v<T, GlanceDistance>) {
    if (v == "greedy") out = GlanceDistance::kGreedy;
    else if (v == "expected") out = GlanceDistance::kExpected;
    else throw ConfigError("bad value for " + key + ": '" + v + "'");
  } else if constexpr (std::is_arithmetic_v<T>) {
    std::istringstream is(v);
    T parsed{};
    is >> parsed;
    if (v.empty() || is.fail() || !is.eof() ||
        (std::is_unsigned_v<T> && v.front() == '-')) {
      throw ConfigError("bad value for " + key + ": '" + v + "'");
    }
    out = parsed;
  } else {
    out.clear();
    std::istringstream is(v);
    std::string item;
    while (std::getline(is, item, ',')) {
      typename T::value_type x;
      parse_value(key, item, x);
      out.push_back(x);
    }
  }
}

template <typename T>
std::string show(const T& v) {
  if constexpr (std::is_same_v<T, bool>) {
    return v ? "true" : "false";
  } else if constexpr (std::is_same_v<T, std::string>) {
    return v;
  } else if constexpr (std::is_same_v<T, GlancePositions>) {
    return v == GlancePositions::kAll ? "all" : "mismatched";
  } else if constexpr (std::is_same_v<T, GlanceDistance>) {
    return v == GlanceDistance::kGreedy ? "greedy" : "expected";
  } else if constexpr (std::is_arithmetic_v<T>) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
  } else {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + show(v[i]);
    return s;
  }
}

struct Field {
  std::string key;  // section.name
  std::function<void(E&, const std::string&)> set;
  std::function<std::string(const E&)> get;
};

template <typename Ref>
Field bind(std::string key, Ref ref) {
  return {key,
          [key, ref](E& c, const std::string& v) { parse_value(key, v, ref(c)); },
          [ref](const E& c) { return show(ref(const_cast<E&>(c))); }};
}

#define S2UT_FIELD(key, expr) bind(key, [](E& c) -> auto& { return expr; })

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      S2UT_FIELD("data.alphabet", c.data.alphabet),
      S2UT_FIELD("data.min_duration", c.data.min_duration),
      S2UT_FIELD("data.max_duration", c.data.max_duration),
      S2UT_FIELD("data.feature_dim", c.data.feature_dim),
      S2UT_FIELD("data.noise", c.data.noise),
      S2UT_FIELD("data.num_units", c.data.num_units),
      S2UT_FIELD("data.min_expansion", c.data.min_expansion),
      S2UT_FIELD("data.max_expansion", c.data.max_expansion),
      S2UT_FIELD("data.p_swap", c.data.p_swap),
      S2UT_FIELD("data.min_phones", c.data.min_phones),
      S2UT_FIELD("data.max_phones", c.data.max_phones),
      S2UT_FIELD("data.train_size", c.data.train_size),
      S2UT_FIELD("data.valid_size", c.data.valid_size),
      S2UT_FIELD("data.test_size", c.data.test_size),
      S2UT_FIELD("data.bench_size", c.data.bench_size),
      S2UT_FIELD("data.bench_min_phones", c.data.bench_min_phones),
      S2UT_FIELD("data.bench_max_phones", c.data.bench_max_phones),
      S2UT_FIELD("data.seed", c.data.seed),
      S2UT_FIELD("data.kmeans_iterations", c.data.kmeans_iterations),
      S2UT_FIELD("data.kmeans_restarts", c.data.kmeans_restarts),
      S2UT_FIELD("model.encoder_layers", c.model.encoder_layers),
      S2UT_FIELD("model.decoder_layers", c.model.decoder_layers),
      S2UT_FIELD("model.d_model", c.model.d_model),
      S2UT_FIELD("model.heads", c.model.heads),
      S2UT_FIELD("model.ffn_dim", c.model.ffn_dim),
      S2UT_FIELD("model.conv_kernel", c.model.conv_kernel),
      S2UT_FIELD("model.upsample", c.model.upsample),
      S2UT_FIELD("model.max_positions", c.model.max_positions),
      S2UT_FIELD("model.dropout", c.model.dropout),
      S2UT_FIELD("train.ar_steps", c.train.ar.steps),
      S2UT_FIELD("train.ar_lr", c.train.ar.peak_lr),
      S2UT_FIELD("train.ar_warmup", c.train.ar.warmup),
      S2UT_FIELD("train.ar_batch_frames", c.train.ar.batch_frames),
      S2UT_FIELD("train.stage1_steps", c.train.stage1.steps),
      S2UT_FIELD("train.stage1_lr", c.train.stage1.peak_lr),
      S2UT_FIELD("train.stage1_warmup", c.train.stage1.warmup),
      S2UT_FIELD("train.stage1_batch_frames", c.train.stage1.batch_frames),
      S2UT_FIELD("train.stage2_steps", c.train.stage2.steps),
      S2UT_FIELD("train.stage2_lr", c.train.stage2.peak_lr),
      S2UT_FIELD("train.stage2_warmup", c.train.stage2.warmup),
      S2UT_FIELD("train.stage2_batch_frames", c.train.stage2.batch_frames),
      S2UT_FIELD("train.beta1", c.train.beta1),
      S2UT_FIELD("train.beta2", c.train.beta2),
      S2UT_FIELD("train.adam_eps", c.train.adam_eps),
      S2UT_FIELD("train.clip_norm", c.train.clip_norm),
      S2UT_FIELD("train.seed", c.train.seed),
      S2UT_FIELD("train.glancing", c.train.glancing),
      S2UT_FIELD("train.glance_start", c.train.glancing_schedule.start_ratio),
      S2UT_FIELD("train.glance_end", c.train.glancing_schedule.end_ratio),
      S2UT_FIELD("train.glance_decay_steps", c.train.glancing_schedule.decay_steps),
      S2UT_FIELD("train.stage2_ratio", c.train.stage2_ratio),
      S2UT_FIELD("train.glance_positions", c.train.glance_options.positions),
      S2UT_FIELD("train.glance_distance", c.train.glance_options.distance),
      S2UT_FIELD("train.valid_every", c.train.valid_every),
      S2UT_FIELD("train.valid_samples", c.train.valid_samples),
      S2UT_FIELD("train.divergence_factor", c.train.divergence_factor),
      S2UT_FIELD("bench.edges", c.bucket_edges),
      S2UT_FIELD("bench.warmup", c.bench_warmup),
      S2UT_FIELD("bench.repeats", c.bench_repeats),
      S2UT_FIELD("bench.split", c.bench_split),
      S2UT_FIELD("ablation.seeds", c.seeds),
      S2UT_FIELD("ablation.eval_limit", c.eval_limit),
  };
  return table;
}

#undef S2UT_FIELD

}  // namespace

void ExperimentConfig::finalize() {
  model.num_units = data.num_units;
  model.feature_dim = data.feature_dim;
  data.upsample = model.upsample;
  data.validate();
  model.validate();
  train.validate();
  for (std::size_t i = 0; i < bucket_edges.size(); ++i) {
    if (bucket_edges[i] == 0 || (i > 0 && bucket_edges[i] <= bucket_edges[i - 1])) {
      throw ConfigError("bench.edges must be positive and strictly increasing");
    }
  }
  if (seeds.empty()) throw ConfigError("ablation.seeds must not be empty");
}

ExperimentConfig parse_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config line " + std::to_string(e.line()) + ": " + e.message());
  }
  ExperimentConfig cfg;
  std::map<std::string, const Field*> by_key;
  std::set<std::string> sections;
  for (const Field& f : fields()) {
    by_key[f.key] = &f;
    sections.insert(f.key.substr(0, f.key.find('.')));
  }
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      throw ConfigError("config key '" + section + "' is outside any section");
    }
    if (!sections.count(section)) throw ConfigError("unknown config section [" + section + "]");
    for (const auto& [name, value] : body) {
      auto it = by_key.find(section + "." + name);
      if (it == by_key.end()) {
        throw ConfigError("unknown config key '" + name + "' in [" + section + "]");
      }
      it->second->set(cfg, value.data());
    }
  }
  cfg.finalize();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) { return parse_config(read_file(path)); }

std::string format_config(const ExperimentConfig& cfg) {
  std::string out;
  std::string current;
  for (const Field& f : fields()) {
    const auto dot = f.key.find('.');
    const std::string section = f.key.substr(0, dot);
    if (section != current) {
      out += (current.empty() ? "[" : "\n[") + section + "]\n";
      current = section;
    }
    out += f.key.substr(dot + 1) + " = " + f.get(cfg) + "\n";
  }
  return out;
}

}  // namespace s2ut
