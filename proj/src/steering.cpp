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

#include "shamans/steering.hpp"

#include <cmath>
#include <random>

namespace shamans {

DoaGrid DoaGrid::Uniform(int num_directions, double elevation_deg,
                         double radius_m) {
  Require(num_directions >= 2, ErrorKind::kParameter,
          "grid needs at least two directions");
  DoaGrid grid;
  grid.elevation_deg = elevation_deg;
  grid.radius_m = radius_m;
  grid.azimuths_deg.resize(num_directions);
  for (int l = 0; l < num_directions; ++l)
    grid.azimuths_deg[l] = 360.0 * l / num_directions;
  return grid;
}

Eigen::Vector3d DirectionFromAngles(double azimuth_deg, double elevation_deg) {
  const double az = azimuth_deg * kPi / 180.0;
  const double el = elevation_deg * kPi / 180.0;
  return {std::cos(el) * std::cos(az), std::cos(el) * std::sin(az),
          std::sin(el)};
}

Eigen::Vector3d DoaGrid::direction(Index l) const {
  return DirectionFromAngles(azimuths_deg[l], elevation_deg);
}

void DoaGrid::Validate() const {
  Require(azimuths_deg.size() >= 2, ErrorKind::kShape,
          "grid needs at least two directions");
  for (std::size_t l = 0; l < azimuths_deg.size(); ++l) {
    Require(azimuths_deg[l] >= 0.0 && azimuths_deg[l] < 360.0,
            ErrorKind::kShape, "grid azimuths must lie in [0, 360)");
    Require(l == 0 || azimuths_deg[l] > azimuths_deg[l - 1], ErrorKind::kShape,
            "grid azimuths must be strictly increasing");
  }
  Require(radius_m > 0.0 && std::isfinite(radius_m), ErrorKind::kShape,
          "grid radius must be positive");
}

double ArrayGeometry::max_radius() const {
  double r = 0.0;
  for (const auto& p : mic_positions) r = std::max(r, p.norm());
  return r;
}

void ArrayGeometry::Validate() const {
  Require(mic_positions.size() >= 2, ErrorKind::kGeometry,
          "array needs at least two microphones");
  for (std::size_t i = 0; i < mic_positions.size(); ++i) {
    Require(mic_positions[i].allFinite(), ErrorKind::kGeometry,
            "microphone position is not finite");
    for (std::size_t j = 0; j < i; ++j)
      Require((mic_positions[i] - mic_positions[j]).norm() > 0.0,
              ErrorKind::kGeometry, "coincident microphones");
  }
}

ArrayGeometry ArrayGeometry::Random(int count, double radius_m,
                                    std::uint64_t seed, double min_spacing_m) {
  Require(count >= 2 && radius_m > 0.0, ErrorKind::kParameter,
          "random array needs count >= 2 and positive radius");
  std::mt19937_64 rng(SubstreamSeed(seed, "array"));
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  ArrayGeometry g;
  int attempts = 0;
  while (static_cast<int>(g.mic_positions.size()) < count) {
    Require(++attempts < 100000, ErrorKind::kGeometry,
            "cannot place microphones with the requested spacing");
    Eigen::Vector3d p(unit(rng), unit(rng), unit(rng));
    if (p.squaredNorm() > 1.0) continue;
    p *= radius_m;
    bool ok = true;
    for (const auto& q : g.mic_positions)
      if ((p - q).norm() < min_spacing_m) ok = false;
    if (ok) g.mic_positions.push_back(p);
  }
  return g;
}

const char* ToString(SvSource tag) {
  switch (tag) {
    case SvSource::kMeasured: return "measured";
    case SvSource::kAlgebraic: return "algebraic";
    case SvSource::kInterpolated: return "interpolated";
    case SvSource::kShCoefficients: return "sh_coefficients";
    case SvSource::kCoordNetWeights: return "coordnet_weights";
  }
  return "unknown";
}

SteeringVectorSet::SteeringVectorSet(std::vector<Eigen::MatrixXcd> values,
                                     DoaGrid grid, std::vector<double> freqs_hz,
                                     SvSource tag)
    : values_(std::move(values)),
      grid_(std::move(grid)),
      freqs_(std::move(freqs_hz)),
      tag_(tag) {
  grid_.Validate();
  Require(!values_.empty() && values_.size() == freqs_.size(),
          ErrorKind::kShape, "one [L x M] block per frequency required");
  const Index m = values_[0].cols();
  Require(m >= 1, ErrorKind::kShape, "steering vectors need a microphone");
  for (std::size_t f = 0; f < values_.size(); ++f) {
    const auto& v = values_[f];
    Require(v.rows() == grid_.size() && v.cols() == m, ErrorKind::kShape,
            "steering block shape disagrees with grid / microphone count");
    Require(v.allFinite(), ErrorKind::kShape,
            "steering vectors contain non-finite values");
    Require(std::isfinite(freqs_[f]) && freqs_[f] >= 0.0, ErrorKind::kShape,
            "frequencies must be finite and nonnegative");
    for (Index l = 0; l < v.rows(); ++l)
      Require(v.row(l).squaredNorm() > 0.0, ErrorKind::kShape,
              "steering vector (l=" + std::to_string(l) +
                  ", f=" + std::to_string(f) + ") is identically zero");
  }
}

Index SteeringVectorSet::FindFreq(double freq_hz, double tol) const {
  for (std::size_t f = 0; f < freqs_.size(); ++f)
    if (std::abs(freqs_[f] - freq_hz) <= tol) return static_cast<Index>(f);
  return -1;
}

SteeringVectorSet SteeringVectorSet::SelectFreqs(
    const std::vector<Index>& indices) const {
  std::vector<Eigen::MatrixXcd> values;
  std::vector<double> freqs;
  for (Index f : indices) {
    Require(f >= 0 && f < num_freqs(), ErrorKind::kShape,
            "frequency index out of range");
    values.push_back(values_[f]);
    freqs.push_back(freqs_[f]);
  }
  return SteeringVectorSet(std::move(values), grid_, std::move(freqs), tag_);
}

SteeringVectorSet SteeringVectorSet::Scaled(double gain) const {
  std::vector<Eigen::MatrixXcd> values = values_;
  for (auto& v : values) v *= gain;
  return SteeringVectorSet(std::move(values), grid_, freqs_, tag_);
}

std::vector<Eigen::MatrixXcd> GreenResponses(
    const ArrayGeometry& geometry,
    const std::vector<Eigen::Vector3d>& source_positions,
    const std::vector<double>& freqs_hz, double speed_of_sound) {
  Require(speed_of_sound > 0.0, ErrorKind::kParameter,
          "speed of sound must be positive");
  const auto n = static_cast<Index>(source_positions.size());
  const Index m = geometry.size();
  Eigen::MatrixXd dist(n, m);
  for (Index l = 0; l < n; ++l)
    for (Index k = 0; k < m; ++k) {
      dist(l, k) = (source_positions[l] - geometry.mic_positions[k]).norm();
      Require(dist(l, k) > 0.0, ErrorKind::kGeometry,
              "source coincides with a microphone");
    }
  std::vector<Eigen::MatrixXcd> out;
  out.reserve(freqs_hz.size());
  for (double f : freqs_hz) {
    Require(f >= 0.0, ErrorKind::kParameter, "frequencies must be >= 0");
    Eigen::MatrixXcd block(n, m);
    for (Index l = 0; l < n; ++l)
      for (Index k = 0; k < m; ++k) {
        const double r = dist(l, k);
        block(l, k) = std::polar(1.0 / (4.0 * kPi * r),
                                 -2.0 * kPi * f * r / speed_of_sound);
      }
    out.push_back(std::move(block));
  }
  return out;
}

SteeringVectorSet AlgebraicSvs(const ArrayGeometry& geometry,
                               const DoaGrid& grid,
                               const std::vector<double>& freqs_hz,
                               double speed_of_sound) {
  grid.Validate();
  Require(!geometry.mic_positions.empty(), ErrorKind::kGeometry,
          "array has no microphones");
  Require(grid.radius_m > geometry.max_radius(), ErrorKind::kGeometry,
          "grid radius must exceed the array radius");
  std::vector<Eigen::Vector3d> positions(grid.size());
  for (Index l = 0; l < grid.size(); ++l) positions[l] = grid.position(l);
  auto values = GreenResponses(geometry, positions, freqs_hz, speed_of_sound);
  return SteeringVectorSet(std::move(values), grid, freqs_hz,
                           SvSource::kAlgebraic);
}

NormalizedSVSet NormalizeSvs(const SteeringVectorSet& svs) {
  NormalizedSVSet out;
  out.grid_ = svs.grid();
  out.freqs_ = svs.freqs_hz();
  out.values_.reserve(svs.num_freqs());
  for (Index f = 0; f < svs.num_freqs(); ++f) {
    Eigen::MatrixXcd block = svs.at_freq(f);
    for (Index l = 0; l < block.rows(); ++l) {
      const double norm2 = block.row(l).squaredNorm();
      Require(norm2 > 0.0, ErrorKind::kNumerical,
              "cannot normalize zero steering vector at (l=" +
                  std::to_string(l) + ", f=" + std::to_string(f) + ")");
      block.row(l) /= norm2;
    }
    out.values_.push_back(std::move(block));
  }
  return out;
}

}  // namespace shamans
