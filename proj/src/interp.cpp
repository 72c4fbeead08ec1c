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

#include "shamans/interp.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include <json.hpp>

#include "shamans/sh.hpp"
#include "shamans/svset_io.hpp"

namespace shamans {
namespace {

// Solves (G + diag(penalty)) X = rhs for symmetric positive semidefinite G,
// rejecting numerically singular systems.
Eigen::MatrixXcd RidgeSolve(const Eigen::MatrixXd& gram,
                            const Eigen::VectorXd& penalty,
                            const Eigen::MatrixXcd& rhs) {
  Eigen::MatrixXd system = gram;
  system.diagonal() += penalty;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(system);
  const double scale = std::max(1.0, system.diagonal().cwiseAbs().maxCoeff());
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      ldlt.rcond() < 1e-13 || ldlt.vectorD().minCoeff() <= 1e-14 * scale) {
    Fail(ErrorKind::kNumerical,
         "singular regression system; increase ridge_lambda or lower the "
         "model order");
  }
  const Eigen::MatrixXd re = ldlt.solve(rhs.real());
  const Eigen::MatrixXd im = ldlt.solve(rhs.imag());
  Eigen::MatrixXcd out(re.rows(), re.cols());
  out.real() = re;
  out.imag() = im;
  return out;
}

std::vector<Index> MatchFreqs(const std::vector<double>& model,
                              const std::vector<double>& request) {
  std::vector<Index> idx;
  idx.reserve(request.size());
  for (double f : request) {
    Index found = -1;
    for (std::size_t k = 0; k < model.size(); ++k)
      if (std::abs(model[k] - f) <= 1e-6) found = static_cast<Index>(k);
    Require(found >= 0, ErrorKind::kShape,
            "requested frequency " + std::to_string(f) +
                " Hz was not part of the fitted model");
    idx.push_back(found);
  }
  return idx;
}

Complex DelayPhase(double freq_hz, double radius_m) {
  return std::polar(1.0, -2.0 * kPi * freq_hz * radius_m / kSpeedOfSound);
}

void WriteSidecar(const std::filesystem::path& path,
                  const nlohmann::json& meta) {
  std::ofstream os(SidecarPath(path));
  Require(os.good(), ErrorKind::kIo,
          "cannot write " + SidecarPath(path).string());
  os << meta.dump(2) << "\n";
}

nlohmann::json ReadSidecar(const std::filesystem::path& path) {
  std::ifstream in(SidecarPath(path));
  Require(in.good(), ErrorKind::kIo,
          "missing model sidecar " + SidecarPath(path).string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kFormat, std::string("bad model sidecar: ") + e.what());
  }
}

}  // namespace

void SparseSvMeasurements::Validate() const {
  Require(!directions.empty(), ErrorKind::kShape,
          "at least one measurement is required");
  Require(!values.empty() && values.size() == freqs_hz.size(),
          ErrorKind::kShape, "one measurement block per frequency required");
  for (const auto& d : directions)
    Require(std::abs(d.norm() - 1.0) < 1e-12, ErrorKind::kShape,
            "measurement directions must be unit vectors");
  for (const auto& v : values)
    Require(v.rows() == size() && v.cols() == values[0].cols() &&
                v.cols() >= 1 && v.allFinite(),
            ErrorKind::kShape, "measurement block has the wrong shape");
}

SparseSvMeasurements SampleGreenMeasurements(const ArrayGeometry& geometry,
                                             int count, double radius_m,
                                             const std::vector<double>& freqs_hz,
                                             std::uint64_t seed) {
  Require(count >= 1, ErrorKind::kParameter, "need at least one measurement");
  std::mt19937_64 rng(SubstreamSeed(seed, "measurements"));
  std::normal_distribution<double> normal;
  SparseSvMeasurements out;
  std::vector<Eigen::Vector3d> positions;
  for (int n = 0; n < count; ++n) {
    Eigen::Vector3d d(normal(rng), normal(rng), normal(rng));
    d.normalize();
    out.directions.push_back(d);
    positions.push_back(radius_m * d);
  }
  out.values = GreenResponses(geometry, positions, freqs_hz);
  out.freqs_hz = freqs_hz;
  out.radius_m = radius_m;
  return out;
}

SparseSvMeasurements MeasurementsFromSvs(const SteeringVectorSet& svs,
                                         const std::vector<Index>& rows) {
  SparseSvMeasurements out;
  for (Index l : rows) {
    Require(l >= 0 && l < svs.num_directions(), ErrorKind::kShape,
            "measurement row out of range");
    out.directions.push_back(svs.grid().direction(l));
  }
  for (Index f = 0; f < svs.num_freqs(); ++f) {
    Eigen::MatrixXcd block(static_cast<Index>(rows.size()), svs.num_mics());
    for (std::size_t n = 0; n < rows.size(); ++n)
      block.row(static_cast<Index>(n)) = svs.at_freq(f).row(rows[n]);
    out.values.push_back(std::move(block));
  }
  out.freqs_hz = svs.freqs_hz();
  out.radius_m = svs.grid().radius_m;
  return out;
}

ShBasisConfig ShBasisConfig::ForCount(Index num_measurements) {
  const auto root =
      static_cast<int>(std::floor(std::sqrt(static_cast<double>(num_measurements))));
  return ShBasisConfig{std::max(0, root - 1), 1e-6};
}

ShModel::ShModel(ShBasisConfig config, std::vector<Eigen::MatrixXcd> coeffs,
                 std::vector<double> freqs_hz)
    : config_(config), coeffs_(std::move(coeffs)), freqs_(std::move(freqs_hz)) {
  Require(config_.max_degree >= 0 && config_.ridge_lambda >= 0.0,
          ErrorKind::kParameter, "invalid SH configuration");
  Require(!coeffs_.empty() && coeffs_.size() == freqs_.size(),
          ErrorKind::kShape, "one coefficient block per frequency required");
  for (const auto& c : coeffs_)
    Require(c.rows() == ShCount(config_.max_degree) &&
                c.cols() == coeffs_[0].cols() && c.allFinite(),
            ErrorKind::kShape, "SH coefficient block has the wrong shape");
}

Eigen::MatrixXcd ShModel::Evaluate(
    const std::vector<Eigen::Vector3d>& directions, Index f) const {
  const Eigen::MatrixXd basis = ShBasisMatrix(directions, config_.max_degree);
  return basis.cast<Complex>() * coeffs_[f];
}

void ShModel::Save(const std::filesystem::path& path) const {
  SvsetRecord r;
  const Index k = ShCount(config_.max_degree);
  for (Index i = 0; i < k; ++i) r.azimuths.push_back(static_cast<double>(i));
  r.freqs = freqs_;
  r.tag = static_cast<std::uint8_t>(SvSource::kShCoefficients);
  r.values = coeffs_;
  r.num_mics = num_mics();
  WriteSvsetRecord(r, path);
  WriteSidecar(path, {{"model", "sh"},
                      {"max_degree", config_.max_degree},
                      {"ridge_lambda", config_.ridge_lambda}});
}

ShModel FitSh(const SparseSvMeasurements& measurements,
              const ShBasisConfig& config) {
  measurements.Validate();
  Require(config.max_degree >= 0 && config.ridge_lambda >= 0.0,
          ErrorKind::kParameter, "invalid SH configuration");
  const Eigen::MatrixXd basis =
      ShBasisMatrix(measurements.directions, config.max_degree);
  const Eigen::MatrixXd gram = basis.transpose() * basis;
  const Eigen::VectorXd penalty =
      Eigen::VectorXd::Constant(basis.cols(), config.ridge_lambda);
  std::vector<Eigen::MatrixXcd> coeffs;
  coeffs.reserve(measurements.values.size());
  for (const auto& values : measurements.values)
    coeffs.push_back(
        RidgeSolve(gram, penalty, basis.transpose().cast<Complex>() * values));
  return ShModel(config, std::move(coeffs), measurements.freqs_hz);
}

CoordNet::CoordNet(CoordNetConfig config, std::vector<double> freqs_hz,
                   double freq_ref_hz, double radius_m,
                   Eigen::MatrixXcd weights)
    : config_(config),
      freqs_(std::move(freqs_hz)),
      freq_ref_(freq_ref_hz),
      radius_(radius_m),
      weights_(std::move(weights)) {
  Require(config_.num_features >= 0 && config_.feature_scale > 0.0 &&
              config_.ridge_lambda >= 0.0,
          ErrorKind::kParameter, "invalid NS-lite configuration");
  Require(freq_ref_ > 0.0 && !freqs_.empty(), ErrorKind::kParameter,
          "NS-lite needs a positive reference frequency");
  Require(weights_.rows() == config_.num_features + 1 && weights_.cols() >= 1,
          ErrorKind::kShape, "NS-lite weights have the wrong shape");
  const Index d = config_.num_features;
  std::mt19937_64 rng(SubstreamSeed(config_.seed, "nslite-features"));
  std::normal_distribution<double> normal(0.0, config_.feature_scale);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  omegas_.resize(d, 4);
  phases_.resize(d);
  for (Index k = 0; k < d; ++k) {
    for (int j = 0; j < 4; ++j) omegas_(k, j) = normal(rng);
    phases_(k) = phase(rng);
  }
}

Eigen::RowVectorXd CoordNet::Features(const Eigen::Vector3d& direction,
                                      double freq_hz) const {
  const Index d = config_.num_features;
  Eigen::Vector4d u(direction(0), direction(1), direction(2),
                    freq_hz / freq_ref_);
  Eigen::RowVectorXd row(d + 1);
  row(0) = 1.0;
  if (d > 0) {
    const double amp = std::sqrt(2.0 / static_cast<double>(d));
    row.tail(d) =
        ((omegas_ * u + phases_).array().cos() * amp).matrix().transpose();
  }
  return row;
}

Eigen::MatrixXcd CoordNet::Evaluate(
    const std::vector<Eigen::Vector3d>& directions, Index f) const {
  Eigen::MatrixXd feats(static_cast<Index>(directions.size()),
                        config_.num_features + 1);
  for (std::size_t n = 0; n < directions.size(); ++n)
    feats.row(static_cast<Index>(n)) = Features(directions[n], freqs_[f]);
  return (feats.cast<Complex>() * weights_) * DelayPhase(freqs_[f], radius_);
}

void CoordNet::Save(const std::filesystem::path& path) const {
  SvsetRecord r;
  for (Index i = 0; i < weights_.rows(); ++i)
    r.azimuths.push_back(static_cast<double>(i));
  r.freqs = {freq_ref_};
  r.tag = static_cast<std::uint8_t>(SvSource::kCoordNetWeights);
  r.values = {weights_};
  r.num_mics = num_mics();
  r.radius = radius_;
  WriteSvsetRecord(r, path);
  WriteSidecar(path, {{"model", "nslite"},
                      {"num_features", config_.num_features},
                      {"feature_scale", config_.feature_scale},
                      {"ridge_lambda", config_.ridge_lambda},
                      {"seed", config_.seed},
                      {"freqs_hz", freqs_}});
}

CoordNet FitCoordNet(const SparseSvMeasurements& measurements,
                     const CoordNetConfig& config) {
  measurements.Validate();
  double freq_ref = 0.0;
  for (double f : measurements.freqs_hz) freq_ref = std::max(freq_ref, f);
  if (freq_ref <= 0.0) freq_ref = 1.0;
  // Zero weights give a model that only carries the feature map.
  const Index d = config.num_features;
  const Index m = measurements.num_mics();
  CoordNet net(config, measurements.freqs_hz, freq_ref, measurements.radius_m,
               Eigen::MatrixXcd::Zero(d + 1, m));

  const Index n = measurements.size();
  const auto nf = static_cast<Index>(measurements.freqs_hz.size());
  Eigen::MatrixXd feats(n * nf, d + 1);
  Eigen::MatrixXcd targets(n * nf, m);
  for (Index f = 0; f < nf; ++f) {
    const double freq = measurements.freqs_hz[f];
    const Complex undo = std::conj(DelayPhase(freq, measurements.radius_m));
    for (Index i = 0; i < n; ++i) {
      feats.row(f * n + i) = net.Features(measurements.directions[i], freq);
      targets.row(f * n + i) = measurements.values[f].row(i) * undo;
    }
  }
  Eigen::VectorXd penalty = Eigen::VectorXd::Constant(d + 1, config.ridge_lambda);
  penalty(0) = 0.0;  // bias is not shrunk
  Eigen::MatrixXcd weights =
      RidgeSolve(feats.transpose() * feats, penalty,
                 feats.transpose().cast<Complex>() * targets);
  return CoordNet(config, measurements.freqs_hz, freq_ref,
                  measurements.radius_m, std::move(weights));
}

SteeringVectorSet InterpSvs(const SvInterpolator& model, const DoaGrid& grid,
                            const std::vector<double>& freqs_hz) {
  grid.Validate();
  const std::vector<Index> idx = MatchFreqs(model.freqs_hz(), freqs_hz);
  std::vector<Eigen::Vector3d> dirs(grid.size());
  for (Index l = 0; l < grid.size(); ++l) dirs[l] = grid.direction(l);
  std::vector<Eigen::MatrixXcd> values;
  values.reserve(idx.size());
  for (Index f : idx) values.push_back(model.Evaluate(dirs, f));
  return SteeringVectorSet(std::move(values), grid, freqs_hz,
                           SvSource::kInterpolated);
}

std::filesystem::path SidecarPath(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".json");
}

std::unique_ptr<SvInterpolator> LoadInterpolator(
    const std::filesystem::path& path) {
  SvsetRecord r = ReadSvsetRecord(path);
  const nlohmann::json meta = ReadSidecar(path);
  try {
    if (r.tag == static_cast<std::uint8_t>(SvSource::kShCoefficients)) {
      ShBasisConfig config{meta.at("max_degree").get<int>(),
                           meta.at("ridge_lambda").get<double>()};
      return std::make_unique<ShModel>(config, std::move(r.values),
                                       std::move(r.freqs));
    }
    if (r.tag == static_cast<std::uint8_t>(SvSource::kCoordNetWeights)) {
      Require(r.values.size() == 1, ErrorKind::kFormat,
              "NS-lite container must hold one weight block");
      CoordNetConfig config{meta.at("num_features").get<int>(),
                            meta.at("feature_scale").get<double>(),
                            meta.at("ridge_lambda").get<double>(),
                            meta.at("seed").get<std::uint64_t>()};
      return std::make_unique<CoordNet>(
          config, meta.at("freqs_hz").get<std::vector<double>>(), r.freqs[0],
          r.radius, std::move(r.values[0]));
    }
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kFormat, std::string("bad model sidecar: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kFormat) throw;
    Fail(ErrorKind::kFormat, path.string() + ": " + e.what());
  }
  Fail(ErrorKind::kFormat, path.string() + " does not hold a fitted model");
}

std::vector<double> InterpErrorReport(const SteeringVectorSet& truth,
                                      const SteeringVectorSet& estimate) {
  Require(truth.grid() == estimate.grid(), ErrorKind::kShape,
          "error report needs identical grids");
  Require(truth.num_freqs() == estimate.num_freqs() &&
              truth.num_mics() == estimate.num_mics(),
          ErrorKind::kShape, "error report needs identical shapes");
  std::vector<double> out(truth.num_freqs());
  for (Index f = 0; f < truth.num_freqs(); ++f) {
    Require(std::abs(truth.freqs_hz()[f] - estimate.freqs_hz()[f]) <= 1e-6,
            ErrorKind::kShape, "error report needs identical frequencies");
    out[f] = (estimate.at_freq(f) - truth.at_freq(f)).norm() /
             truth.at_freq(f).norm();
  }
  return out;
}

}  // namespace shamans
