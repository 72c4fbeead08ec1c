/*
Copyright 2026 The SHAMaNS Toolkit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#ifndef SHAMANS_COMMON_HPP_
#define SHAMANS_COMMON_HPP_

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace shamans {

using Complex = std::complex<double>;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Index = Eigen::Index;

// Failure categories. The CLI maps these onto process exit codes.
enum class ErrorKind {
  kIo,            // missing / truncated / unwritable files
  kFormat,        // malformed file contents
  kParameter,     // argument outside its documented range
  kShape,         // tensor dimensions or frequency grids disagree
  kGeometry,      // degenerate array or source placement
  kNumerical,     // singular systems, failed estimation
  kScene,         // invalid scene description
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void Fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void Require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) Fail(kind, what);
}

// splitmix64 finalizer; used to derive independent seeds for named
// substreams from one master seed.
constexpr std::uint64_t MixSeed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t HashString(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t SubstreamSeed(std::uint64_t master,
                                      std::string_view name,
                                      std::uint64_t index = 0) {
  return MixSeed(MixSeed(master ^ HashString(name)) + index);
}

inline constexpr double kPi = 3.14159265358979323846;

}  // namespace shamans

#endif  // SHAMANS_COMMON_HPP_
