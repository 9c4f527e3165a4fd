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

#include <bit>
#include <cstring>

#include "s2ut/error.h"
#include "s2ut/io.h"
#include "s2ut/model.h"

namespace s2ut {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

void save_checkpoint(const S2utModel& model, const std::string& path) {
  BinaryWriter w;
  w.bytes("CS2U", 4);
  w.u32(kCheckpointVersion);
  const std::string cfg = model.config().to_text();
  w.u32(static_cast<std::uint32_t>(cfg.size()));
  w.bytes(cfg.data(), cfg.size());
  const auto& params = model.parameters().all();
  w.u64(params.size());
  for (const Parameter& p : params) {
    w.u32(static_cast<std::uint32_t>(p.name().size()));
    w.bytes(p.name().data(), p.name().size());
    w.u32(static_cast<std::uint32_t>(p.value().rank()));
    for (std::size_t d : p.value().shape()) w.u64(d);
    w.f64s(p.value().data());
  }
  write_file_atomic(path, w.buffer());
}

namespace {

ModelConfig read_header(BinaryReader& r, const std::string& path) {
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, "CS2U", 4) != 0) throw IoError(path + " is not a checkpoint");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw IoError(path + " has unsupported checkpoint version " + std::to_string(version));
  }
  std::string text(r.u32(), '\0');
  r.bytes(text.data(), text.size());
  return ModelConfig::from_text(text);
}

}  // namespace

ModelConfig read_checkpoint_config(const std::string& path) {
  BinaryReader r(read_file(path), path);
  return read_header(r, path);
}

void load_checkpoint(S2utModel& model, const std::string& path) {
  BinaryReader r(read_file(path), path);
  const ModelConfig stored = read_header(r, path);
  ModelConfig expected = model.config();
  // Dropout does not change the parameter layout.
  expected.dropout = stored.dropout;
  if (!(stored == expected)) {
    throw ConfigError(path + " config does not match the requested model:\n" +
                      stored.to_text() + "vs\n" + model.config().to_text());
  }
  const std::uint64_t count = r.u64();
  if (count != model.parameters().count()) {
    throw IoError(path + " holds " + std::to_string(count) + " parameters, model has " +
                  std::to_string(model.parameters().count()));
  }
  for (std::uint64_t i = 0; i < count; ++i) {
    std::string name(r.u32(), '\0');
    r.bytes(name.data(), name.size());
    Parameter* p = model.parameters().find(name);
    if (p == nullptr) throw IoError(path + " has unknown parameter " + name);
    Shape shape(r.u32());
    for (auto& d : shape) d = r.u64();
    if (shape != p->value().shape()) {
      throw IoError(path + " parameter " + name + " has shape " + shape_to_string(shape) +
                    ", expected " + p->value().shape_str());
    }
    r.f64s(p->value().data());
  }
  if (!r.at_end()) throw IoError(path + " has trailing bytes");
}

}  // namespace s2ut
