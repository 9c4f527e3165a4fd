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

#include "s2ut/synth.h"

#include <algorithm>
#include <random>
#include <set>

#include "s2ut/error.h"
#include "s2ut/kmeans.h"

namespace s2ut {

namespace {

enum Stream : std::uint64_t {
  kTableStream = 1,
  kPhoneStream = 2,
  kPrototypeStream = 3,
  kKMeansStream = 4,
  kSampleStream = 1000,
};

Tensor gaussian(std::size_t rows, std::size_t cols, double sigma, std::mt19937_64& rng) {
  Tensor t = Tensor::matrix(rows, cols);
  std::normal_distribution<double> dist(0.0, sigma);
  for (double& v : t.data()) v = dist(rng);
  return t;
}

int uniform_int(int lo, int hi, std::mt19937_64& rng) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

Dataset quantize(const std::vector<SynthSample>& samples, const Tensor& codebook) {
  Dataset d;
  for (const auto& s : samples) {
    UnitSequence y;
    for (std::size_t r = 0; r < s.target.rows(); ++r) {
      y.units.push_back(kmeans_assign(s.target.row(r), codebook));
    }
    d.features.push_back({s.source});
    d.units.push_back(std::move(y));
  }
  return d;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  // splitmix64 finalizer over the combined value.
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void SynthTaskSpec::validate() const {
  auto need = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  need(alphabet >= 1, "alphabet must be >= 1");
  need(1 <= min_duration && min_duration <= max_duration, "bad duration range");
  need(feature_dim >= 1, "feature_dim must be >= 1");
  need(noise >= 0.0, "noise must be >= 0");
  need(num_units >= 2, "num_units must be >= 2");
  need(1 <= min_expansion && min_expansion <= max_expansion, "bad expansion range");
  need(alphabet * max_expansion >= num_units, "expansion table cannot cover all units");
  need(p_swap >= 0.0 && p_swap <= 0.5, "p_swap must be in [0, 0.5]");
  need(1 <= min_phones && min_phones <= max_phones, "bad phone count range");
  need(1 <= bench_min_phones && bench_min_phones <= bench_max_phones,
       "bad bench phone count range");
  need(min_phones * min_duration >= 4 && bench_min_phones * min_duration >= 4,
       "shortest sample must have at least 4 frames");
  need(train_size >= 1, "train_size must be >= 1");
  need(upsample >= 1, "upsample must be >= 1");
  need(kmeans_iterations >= 1 && kmeans_restarts >= 1, "bad kmeans settings");
}

std::vector<std::vector<int>> expansion_table(const SynthTaskSpec& spec) {
  std::mt19937_64 rng(derive_seed(spec.seed, kTableStream));
  for (int attempt = 0; attempt < 1000; ++attempt) {
    std::vector<std::vector<int>> table(spec.alphabet);
    std::set<int> used;
    for (auto& entry : table) {
      const int len = uniform_int(spec.min_expansion, spec.max_expansion, rng);
      while (int(entry.size()) < len) {
        const int u = uniform_int(0, spec.num_units - 1, rng);
        if (!entry.empty() && entry.back() == u) continue;
        entry.push_back(u);
        used.insert(u);
      }
    }
    if (int(used.size()) == spec.num_units) return table;
  }
  throw ConfigError("could not draw an expansion table covering all " +
                    std::to_string(spec.num_units) + " units");
}

SynthSample draw_sample(const SynthTaskSpec& spec, const std::vector<std::vector<int>>& table,
                        const Tensor& phone_embeddings, const Tensor& prototypes,
                        std::uint64_t sample_id, int min_phones, int max_phones) {
  std::mt19937_64 rng(derive_seed(spec.seed, kSampleStream + sample_id));
  std::normal_distribution<double> noise(0.0, spec.noise);
  std::bernoulli_distribution swap(spec.p_swap);
  SynthSample s;
  const int p = uniform_int(min_phones, max_phones, rng);
  for (int i = 0; i < p; ++i) s.phones.push_back(uniform_int(0, spec.alphabet - 1, rng));

  std::vector<double> frames;
  for (int ph : s.phones) {
    const int dur = uniform_int(spec.min_duration, spec.max_duration, rng);
    for (int f = 0; f < dur; ++f) {
      for (double e : phone_embeddings.row(ph)) frames.push_back(e + noise(rng));
    }
  }
  const std::size_t dim = spec.feature_dim;
  const std::size_t n = frames.size() / dim;
  s.source = Tensor({n, dim}, std::move(frames));

  s.target_phones = s.phones;
  for (int i = 0; i + 1 < p; ++i) {
    if (swap(rng)) std::swap(s.target_phones[i], s.target_phones[i + 1]);
  }
  for (int ph : s.target_phones) {
    for (int u : table[ph]) s.prototypes.push_back(u);
  }
  s.target = Tensor::matrix(s.prototypes.size(), dim);
  for (std::size_t r = 0; r < s.prototypes.size(); ++r) {
    const auto proto = prototypes.row(s.prototypes[r]);
    auto out = s.target.row(r);
    for (std::size_t j = 0; j < dim; ++j) out[j] = proto[j] + noise(rng);
  }
  return s;
}

double infeasible_fraction(const Dataset& data, int upsample) {
  if (data.size() == 0) return 0.0;
  std::size_t bad = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::size_t t = std::size_t(upsample) * subsampled_length(data.features[i].length());
    if (min_alignment_length(data.units[i]) > t) ++bad;
  }
  return double(bad) / double(data.size());
}

SynthData generate_dataset(const SynthTaskSpec& spec) {
  spec.validate();
  SynthData out;
  out.expansion = expansion_table(spec);
  std::mt19937_64 phone_rng(derive_seed(spec.seed, kPhoneStream));
  out.phone_embeddings = gaussian(spec.alphabet, spec.feature_dim, 1.0, phone_rng);
  std::mt19937_64 proto_rng(derive_seed(spec.seed, kPrototypeStream));
  out.prototypes = gaussian(spec.num_units, spec.feature_dim, 1.0, proto_rng);

  std::uint64_t next_id = 0;
  auto draw = [&](std::size_t n, int lo, int hi) {
    std::vector<SynthSample> v;
    for (std::size_t i = 0; i < n; ++i) {
      v.push_back(draw_sample(spec, out.expansion, out.phone_embeddings, out.prototypes,
                              next_id++, lo, hi));
    }
    return v;
  };
  const auto train = draw(spec.train_size, spec.min_phones, spec.max_phones);
  const auto valid = draw(spec.valid_size, spec.min_phones, spec.max_phones);
  const auto test = draw(spec.test_size, spec.min_phones, spec.max_phones);
  const auto bench = draw(spec.bench_size, spec.bench_min_phones, spec.bench_max_phones);

  std::vector<double> points;
  std::size_t frames = 0, phone_count = 0;
  for (const auto& s : train) {
    points.insert(points.end(), s.target.data().begin(), s.target.data().end());
    frames += s.source.rows();
    phone_count += s.phones.size();
  }
  const std::size_t dim = spec.feature_dim;
  const std::size_t n = points.size() / dim;
  const Tensor all({n, dim}, std::move(points));
  out.codebook = kmeans_fit_restarts(all, spec.num_units, spec.kmeans_iterations,
                                     derive_seed(spec.seed, kKMeansStream),
                                     spec.kmeans_restarts)
                     .centroids;
  out.train = quantize(train, out.codebook);
  out.valid = quantize(valid, out.codebook);
  out.test = quantize(test, out.codebook);
  out.bench = quantize(bench, out.codebook);
  out.mean_frames_per_phone = double(frames) / double(phone_count);
  out.infeasible_fraction = infeasible_fraction(out.train, spec.upsample);
  if (out.infeasible_fraction >= 0.02) {
    out.warnings.push_back("warning: " + std::to_string(out.infeasible_fraction * 100.0) +
                           "% of training samples are CTC-infeasible at upsample " +
                           std::to_string(spec.upsample));
  }
  return out;
}

void write_dataset(const SynthData& data, const SynthTaskSpec& spec, const std::string& dir) {
  std::vector<ManifestEntry> manifest;
  save_split(dir, "train", data.train, spec.feature_dim, &manifest);
  save_split(dir, "valid", data.valid, spec.feature_dim, &manifest);
  save_split(dir, "test", data.test, spec.feature_dim, &manifest);
  if (spec.bench_size > 0) save_split(dir, "bench", data.bench, spec.feature_dim, &manifest);
  write_manifest(dir + "/manifest.tsv", manifest);
}

}  // namespace s2ut
