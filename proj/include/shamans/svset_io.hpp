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

#ifndef SHAMANS_SVSET_IO_HPP_
#define SHAMANS_SVSET_IO_HPP_

#include <filesystem>
#include <vector>

#include "shamans/common.hpp"

namespace shamans {

// Raw contents of an SVSET container, before any semantic validation. Fitted
// interpolators reuse the container with row "azimuths" holding indices.
struct SvsetRecord {
  double radius = 0.0;
  double elevation = 0.0;
  std::vector<double> azimuths;  // L row labels
  std::vector<double> freqs;     // F
  std::uint8_t tag = 0;
  std::vector<Eigen::MatrixXcd> values;  // F entries of [L x M]
  Index num_mics = 0;
};

inline constexpr std::uint32_t kSvsetVersion = 1;

void WriteSvsetRecord(const SvsetRecord& record,
                      const std::filesystem::path& path);
SvsetRecord ReadSvsetRecord(const std::filesystem::path& path);

}  // namespace shamans

#endif  // SHAMANS_SVSET_IO_HPP_
