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

#ifndef SHAMANS_STEERING_HPP_
#define SHAMANS_STEERING_HPP_

#include <filesystem>
#include <vector>

#include "shamans/common.hpp"

namespace shamans {

// Candidate source directions on a horizontal ring at fixed elevation.
struct DoaGrid {
  std::vector<double> azimuths_deg;
  double elevation_deg = 0.0;
  double radius_m = 1.7;

  // L azimuths spaced 360 / L degrees apart, starting at 0.
  static DoaGrid Uniform(int num_directions, double elevation_deg = 0.0,
                         double radius_m = 1.7);

  Index size() const { return static_cast<Index>(azimuths_deg.size()); }
  Eigen::Vector3d direction(Index l) const;
  Eigen::Vector3d position(Index l) const { return radius_m * direction(l); }

  void Validate() const;
  bool operator==(const DoaGrid&) const = default;
};

// Unit vector for an (azimuth, elevation) pair in degrees. Azimuth is
// measured counter-clockwise from +x in the horizontal plane.
Eigen::Vector3d DirectionFromAngles(double azimuth_deg, double elevation_deg);

struct ArrayGeometry {
  std::vector<Eigen::Vector3d> mic_positions;

  Index size() const { return static_cast<Index>(mic_positions.size()); }
  double max_radius() const;
  void Validate() const;

  // Microphones drawn uniformly inside a ball, rejecting placements closer
  // than min_spacing to an existing microphone.
  static ArrayGeometry Random(int count, double radius_m, std::uint64_t seed,
                              double min_spacing_m = 0.01);
};

enum class SvSource : std::uint8_t {
  kMeasured = 0,
  kAlgebraic = 1,
  kInterpolated = 2,
  // Container reuse for fitted interpolators (see interp.hpp).
  kShCoefficients = 3,
  kCoordNetWeights = 4,
};

const char* ToString(SvSource tag);

// Complex steering vectors a_lf for every grid direction l and frequency f.
// Stored per frequency as an [L x M] matrix whose row l is a_lf^T.
class SteeringVectorSet {
 public:
  SteeringVectorSet() = default;
  SteeringVectorSet(std::vector<Eigen::MatrixXcd> values, DoaGrid grid,
                    std::vector<double> freqs_hz, SvSource tag);

  Index num_directions() const { return grid_.size(); }
  Index num_mics() const { return values_.empty() ? 0 : values_[0].cols(); }
  Index num_freqs() const { return static_cast<Index>(values_.size()); }

  const Eigen::MatrixXcd& at_freq(Index f) const { return values_[f]; }
  const std::vector<Eigen::MatrixXcd>& values() const { return values_; }
  Complex operator()(Index l, Index m, Index f) const {
    return values_[f](l, m);
  }
  const DoaGrid& grid() const { return grid_; }
  const std::vector<double>& freqs_hz() const { return freqs_; }
  SvSource tag() const { return tag_; }

  // Index of the stored frequency within tol Hz of freq_hz, or -1.
  Index FindFreq(double freq_hz, double tol = 1e-6) const;

  // Same directions, restricted to the listed frequency indices.
  SteeringVectorSet SelectFreqs(const std::vector<Index>& indices) const;

  // Multiplies every vector by a scalar gain.
  SteeringVectorSet Scaled(double gain) const;

 private:
  std::vector<Eigen::MatrixXcd> values_;
  DoaGrid grid_;
  std::vector<double> freqs_;
  SvSource tag_ = SvSource::kMeasured;
};

// Steering vectors divided by their squared norm: a / ||a||^2.
class NormalizedSVSet {
 public:
  Index num_directions() const { return grid_.size(); }
  Index num_mics() const { return values_.empty() ? 0 : values_[0].cols(); }
  Index num_freqs() const { return static_cast<Index>(values_.size()); }
  const Eigen::MatrixXcd& at_freq(Index f) const { return values_[f]; }
  const DoaGrid& grid() const { return grid_; }
  const std::vector<double>& freqs_hz() const { return freqs_; }

 private:
  friend NormalizedSVSet NormalizeSvs(const SteeringVectorSet&);
  std::vector<Eigen::MatrixXcd> values_;
  DoaGrid grid_;
  std::vector<double> freqs_;
};

inline constexpr double kSpeedOfSound = 343.0;

// Free-field point-source Green's function from each grid point to each
// microphone: exp(-i 2 pi f r / c) / (4 pi r).
SteeringVectorSet AlgebraicSvs(const ArrayGeometry& geometry,
                               const DoaGrid& grid,
                               const std::vector<double>& freqs_hz,
                               double speed_of_sound = kSpeedOfSound);

// The same model evaluated at arbitrary source positions; returns one
// [N x M] matrix per frequency.
std::vector<Eigen::MatrixXcd> GreenResponses(
    const ArrayGeometry& geometry,
    const std::vector<Eigen::Vector3d>& source_positions,
    const std::vector<double>& freqs_hz,
    double speed_of_sound = kSpeedOfSound);

// Throws kNumerical naming (l, f) when a vector is identically zero.
NormalizedSVSet NormalizeSvs(const SteeringVectorSet& svs);

// SVSET binary container. Layout (little-endian):
//   "SVST" | u32 version=1 | u32 L | u32 M | u32 F | f64 radius |
//   f64 elevation | f64 azimuths[L] | f64 freqs[F] | u8 tag |
//   (f32 re, f32 im)[L*M*F], l-major then m then f.
void SaveSvset(const SteeringVectorSet& svs, const std::filesystem::path& path);
SteeringVectorSet LoadSvset(const std::filesystem::path& path);

}  // namespace shamans

#endif  // SHAMANS_STEERING_HPP_
