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

#ifndef SHAMANS_SCENES_HPP_
#define SHAMANS_SCENES_HPP_

#include <filesystem>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "shamans/signal.hpp"
#include "shamans/steering.hpp"

namespace shamans {

struct SasSource {
  double alpha = 1.5;
  double scale = 1.0;
  bool operator==(const SasSource&) const = default;
};

struct WavSources {
  std::vector<std::filesystem::path> paths;
  bool operator==(const WavSources&) const = default;
};

struct NoReverb {
  bool operator==(const NoReverb&) const = default;
};

// Isotropic late-field surrogate: decaying Gaussian field steered through
// every grid direction.
struct DiffuseReverb {
  double t60_s = 0.3;
  bool operator==(const DiffuseReverb&) const = default;
};

struct SceneSpec {
  std::vector<int> source_indices;
  std::variant<SasSource, WavSources> source_kind = SasSource{};
  // +infinity disables the additive noise.
  double snr_db = std::numeric_limits<double>::infinity();
  std::variant<NoReverb, DiffuseReverb> reverb = NoReverb{};
  std::uint64_t seed = 0;
  double duration_s = 2.0;
  int sample_rate = 48000;
  // Minimum circular separation between sources, in grid cells.
  int min_separation_cells = 2;

  void Validate(Index grid_size) const;
  bool operator==(const SceneSpec&) const = default;
};

struct SceneTruth {
  std::vector<double> azimuths_deg;
  std::vector<int> indices;
  double realized_snr_db = std::numeric_limits<double>::infinity();
  // Gain applied to the unit-variance noise draw.
  double noise_scale = 0.0;
};

struct Scene {
  Spectrogram spectrogram;
  SceneTruth truth;
};

// Number of STFT frames for a duration.
Index SceneFrames(const SceneSpec& spec, const StftParams& stft);

// Builds X_ft = sum_n a_{l_n f} S_nft + N_ft directly in the STFT domain.
// Source signals are drawn per grid index, so adding a source never changes
// the others; the noise draw depends only on the seed and shape.
Scene SynthScene(const SceneSpec& spec, const SteeringVectorSet& svs,
                 const StftParams& stft);

// Unit-variance circular complex Gaussian noise (each bin [M x T]) used by
// SynthScene for the given seed.
std::vector<Eigen::MatrixXcd> SceneNoise(std::uint64_t seed, Index channels,
                                         Index bins, Index frames);

// Random source placement respecting the separation constraint.
std::vector<int> DrawSourceIndices(int count, Index grid_size,
                                   int min_separation_cells,
                                   std::uint64_t seed);

// One point of a parameter sweep: named numeric overrides.
struct SweepPoint {
  std::vector<std::pair<std::string, double>> values;
};

struct BatchEntry {
  SceneSpec spec;
  std::uint64_t seed = 0;
  std::size_t point = 0;  // index into the sweep
};

// Recognized sweep keys: "snr_db", "num_sources", "t60_s". For each sweep
// point and each i < count, derives seed_i from (base.seed, point, i) and
// draws fresh source positions when the point sets num_sources.
std::vector<BatchEntry> SceneBatch(const SceneSpec& base,
                                   const std::vector<SweepPoint>& sweep,
                                   int count, Index grid_size);

// Cartesian product of named axes.
std::vector<SweepPoint> SweepGrid(
    const std::vector<std::pair<std::string, std::vector<double>>>& axes);

nlohmann::json ToJson(const SceneSpec& spec);
SceneSpec SceneSpecFromJson(const nlohmann::json& j);
nlohmann::json ToJson(const SceneTruth& truth);

// Spectrogram dump in an SVSET-style container. Layout (little-endian):
//   "SPGM" | u32 version=1 | u32 M | u32 F | u32 T | u32 sample_rate |
//   u32 frame_size | u32 hop | (f64 re, f64 im)[M*F*T], m-major then f
//   then t. Double precision so a dumped scene localizes identically.
void SaveSpectrogram(const Spectrogram& spec,
                     const std::filesystem::path& path);
Spectrogram LoadSpectrogram(const std::filesystem::path& path);

}  // namespace shamans

#endif  // SHAMANS_SCENES_HPP_
