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

#ifndef SHAMANS_INTERP_HPP_
#define SHAMANS_INTERP_HPP_

#include <filesystem>
#include <memory>
#include <vector>

#include "shamans/common.hpp"
#include "shamans/steering.hpp"

namespace shamans {

// Steering vectors observed at scattered directions on the sphere.
struct SparseSvMeasurements {
  std::vector<Eigen::Vector3d> directions;  // unit vectors
  std::vector<Eigen::MatrixXcd> values;     // per frequency, [N_SV x M]
  std::vector<double> freqs_hz;
  double radius_m = 0.0;  // source distance; 0 when unknown

  Index size() const { return static_cast<Index>(directions.size()); }
  Index num_mics() const { return values.empty() ? 0 : values[0].cols(); }
  void Validate() const;
};

// Uniform random directions on the sphere measured through the free-field
// model at the given distance.
SparseSvMeasurements SampleGreenMeasurements(const ArrayGeometry& geometry,
                                             int count, double radius_m,
                                             const std::vector<double>& freqs_hz,
                                             std::uint64_t seed);

// Measurement container. Layout (little-endian):
//   "SVMS" | u32 version=1 | u32 N | u32 M | u32 F | f64 radius |
//   f64 directions[N*3] | f64 freqs[F] | (f32 re, f32 im)[N*M*F],
//   n-major then m then f.
void SaveMeasurements(const SparseSvMeasurements& measurements,
                      const std::filesystem::path& path);
SparseSvMeasurements LoadMeasurements(const std::filesystem::path& path);

// Picks rows of an existing set as measurements.
SparseSvMeasurements MeasurementsFromSvs(const SteeringVectorSet& svs,
                                         const std::vector<Index>& rows);

struct ShBasisConfig {
  int max_degree = 0;
  double ridge_lambda = 1e-6;

  // max(0, floor(sqrt(N_SV)) - 1) with lambda 1e-6.
  static ShBasisConfig ForCount(Index num_measurements);
};

struct CoordNetConfig {
  int num_features = 256;
  double feature_scale = 3.0;
  double ridge_lambda = 1e-6;
  std::uint64_t seed = 0;
};

// Anything that can produce steering vectors for arbitrary directions at the
// frequencies it was fitted on.
class SvInterpolator {
 public:
  virtual ~SvInterpolator() = default;

  virtual const std::vector<double>& freqs_hz() const = 0;
  virtual Index num_mics() const = 0;
  // [directions x M] responses at stored frequency index f.
  virtual Eigen::MatrixXcd Evaluate(
      const std::vector<Eigen::Vector3d>& directions, Index f) const = 0;

  virtual void Save(const std::filesystem::path& path) const = 0;
};

// Per-(m, f) ridge regression onto real spherical harmonics.
class ShModel final : public SvInterpolator {
 public:
  ShModel(ShBasisConfig config, std::vector<Eigen::MatrixXcd> coeffs,
          std::vector<double> freqs_hz);

  const ShBasisConfig& config() const { return config_; }
  // [(max_degree + 1)^2 x M] coefficients at frequency index f.
  const Eigen::MatrixXcd& coeffs(Index f) const { return coeffs_[f]; }

  const std::vector<double>& freqs_hz() const override { return freqs_; }
  Index num_mics() const override { return coeffs_[0].cols(); }
  Eigen::MatrixXcd Evaluate(const std::vector<Eigen::Vector3d>& directions,
                            Index f) const override;
  void Save(const std::filesystem::path& path) const override;

 private:
  ShBasisConfig config_;
  std::vector<Eigen::MatrixXcd> coeffs_;
  std::vector<double> freqs_;
};

ShModel FitSh(const SparseSvMeasurements& measurements,
              const ShBasisConfig& config);

// Random trigonometric features of (x, y, z, f / f_ref) followed by one
// ridge regression per microphone. Targets are compensated for the common
// propagation delay radius / c before fitting.
class CoordNet final : public SvInterpolator {
 public:
  CoordNet(CoordNetConfig config, std::vector<double> freqs_hz,
           double freq_ref_hz, double radius_m,
           Eigen::MatrixXcd weights);

  const CoordNetConfig& config() const { return config_; }
  const Eigen::MatrixXcd& weights() const { return weights_; }
  double freq_ref_hz() const { return freq_ref_; }
  double radius_m() const { return radius_; }

  // Feature row [1, sqrt(2/D) cos(w_k . u + b_k)] for one input.
  Eigen::RowVectorXd Features(const Eigen::Vector3d& direction,
                              double freq_hz) const;

  const std::vector<double>& freqs_hz() const override { return freqs_; }
  Index num_mics() const override { return weights_.cols(); }
  Eigen::MatrixXcd Evaluate(const std::vector<Eigen::Vector3d>& directions,
                            Index f) const override;
  void Save(const std::filesystem::path& path) const override;

 private:
  CoordNetConfig config_;
  std::vector<double> freqs_;
  double freq_ref_;
  double radius_;
  Eigen::MatrixXd omegas_;  // [D x 4]
  Eigen::VectorXd phases_;  // [D]
  Eigen::MatrixXcd weights_;  // [(D + 1) x M]
};

CoordNet FitCoordNet(const SparseSvMeasurements& measurements,
                     const CoordNetConfig& config);

// Evaluates a fitted interpolator on a grid. Every requested frequency must
// be one the model was fitted on.
SteeringVectorSet InterpSvs(const SvInterpolator& model, const DoaGrid& grid,
                            const std::vector<double>& freqs_hz);

// Loads either model type from an SVSET container plus its JSON sidecar.
std::unique_ptr<SvInterpolator> LoadInterpolator(
    const std::filesystem::path& path);

// Sidecar written next to a saved model.
std::filesystem::path SidecarPath(const std::filesystem::path& path);

// Per-frequency ||estimate - truth||_F / ||truth||_F over all (l, m).
std::vector<double> InterpErrorReport(const SteeringVectorSet& truth,
                                      const SteeringVectorSet& estimate);

}  // namespace shamans

#endif  // SHAMANS_INTERP_HPP_
