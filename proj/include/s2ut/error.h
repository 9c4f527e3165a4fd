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

#ifndef S2UT_ERROR_H_
#define S2UT_ERROR_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace s2ut {

// Every error raised by the library carries a short machine-readable code.
// The CLI prints it as the prefix of its one-line failure message.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what) : Error("E_SHAPE", what) {}
};

class RangeError : public Error {
 public:
  explicit RangeError(const std::string& what) : Error("E_RANGE", what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("E_CONFIG", what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error("E_IO", what) {}
};

class LatticeError : public Error {
 public:
  explicit LatticeError(const std::string& what) : Error("E_LATTICE", what) {}
};

// Target needs more alignment slots than the lattice has.
class InfeasibleAlignment : public Error {
 public:
  InfeasibleAlignment(std::size_t length, std::size_t min_length)
      : Error("E_INFEASIBLE",
              "alignment length " + std::to_string(length) +
                  " is below min_alignment_length " +
                  std::to_string(min_length)),
        length_(length),
        min_length_(min_length) {}
  std::size_t length() const { return length_; }
  std::size_t min_length() const { return min_length_; }

 private:
  std::size_t length_;
  std::size_t min_length_;
};

}  // namespace s2ut

#endif  // S2UT_ERROR_H_
