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

#ifndef SHAMANS_TESTS_TEST_UTIL_HPP_
#define SHAMANS_TESTS_TEST_UTIL_HPP_

#include <filesystem>
#include <random>
#include <string>

#include "shamans/common.hpp"

namespace shamans::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("shamans_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

inline Eigen::MatrixXcd RandomComplex(Index rows, Index cols,
                                      std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::MatrixXcd m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = Complex(g(rng), g(rng));
  return m;
}

// Expects `body` to throw shamans::Error of the given kind.
template <typename Fn>
bool ThrowsKind(Fn&& body, ErrorKind kind) {
  try {
    body();
  } catch (const Error& e) {
    return e.kind() == kind;
  }
  return false;
}

}  // namespace shamans::testing

#endif  // SHAMANS_TESTS_TEST_UTIL_HPP_
