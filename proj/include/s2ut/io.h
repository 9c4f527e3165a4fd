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

#ifndef S2UT_IO_H_
#define S2UT_IO_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace s2ut {

// Whole-file reads and atomic writes (temp file in the same directory, then
// rename). Failures throw IoError naming the path.
std::string read_file(const std::string& path);
void write_file_atomic(const std::string& path, const std::string& contents);

class BinaryWriter {
 public:
  void bytes(const void* p, std::size_t n);
  void u32(std::uint32_t v) { bytes(&v, sizeof v); }
  void u64(std::uint64_t v) { bytes(&v, sizeof v); }
  void f64s(std::span<const double> v) { bytes(v.data(), v.size() * sizeof(double)); }
  const std::string& buffer() const { return buf_; }

 private:
  std::string buf_;
};

class BinaryReader {
 public:
  BinaryReader(std::string data, std::string source);

  void bytes(void* p, std::size_t n);
  std::uint32_t u32();
  std::uint64_t u64();
  void f64s(std::span<double> out);
  bool at_end() const { return pos_ == data_.size(); }

 private:
  std::string data_;
  std::string source_;
  std::size_t pos_ = 0;
};

}  // namespace s2ut

#endif  // S2UT_IO_H_
