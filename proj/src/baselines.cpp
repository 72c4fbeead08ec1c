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

#include "shamans/baselines.hpp"

#include <algorithm>

namespace shamans {
namespace {

constexpr double kCovarianceLoading = 1e-12;
constexpr double kProjectionFloor = 1e-12;

// Row indices into svs for every non-DC spectrogram bin, paired by value.
std::vector<std::pair<Index, Index>> PairedBins(const Spectrogram& spec,
                                                const SteeringVectorSet& svs) {
  Require(spec.channels() == svs.num_mics(), ErrorKind::kShape,
          "spectrogram and SVs disagree on the microphone count");
  std::vector<std::pair<Index, Index>> pairs;
  for (Index b = 1; b < spec.num_freqs(); ++b) {
    const Index k = svs.FindFreq(spec.freq_hz(b));
    Require(k >= 0, ErrorKind::kShape,
            "no steering vectors at " + std::to_string(spec.freq_hz(b)) +
                " Hz");
    pairs.emplace_back(b, k);
  }
  Require(!pairs.empty(), ErrorKind::kShape,
          "spectrogram has no bins above DC");
  return pairs;
}

}  // namespace

Eigen::VectorXd MaxNormalize(const Eigen::VectorXd& values) {
  const double peak = values.size() > 0 ? values.maxCoeff() : 0.0;
  return peak > 0.0 ? Eigen::VectorXd(values / peak) : values;
}

Eigen::VectorXd MusicPseudospectrum(const Eigen::MatrixXcd& observations,
                                    const Eigen::MatrixXcd& steering,
                                    int subspace_rank) {
  const Index m = observations.rows();
  Require(subspace_rank >= 1 && subspace_rank < m, ErrorKind::kParameter,
          "MUSIC subspace rank must satisfy 1 <= k < M");
  Eigen::MatrixXcd cov = observations * observations.adjoint() /
                         static_cast<double>(observations.cols());
  cov.diagonal().array() += kCovarianceLoading;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(cov);
  Require(eig.info() == Eigen::Success, ErrorKind::kNumerical,
          "covariance eigendecomposition failed");
  // Eigenvalues ascend, so the noise subspace is the leading block.
  const Eigen::MatrixXcd noise = eig.eigenvectors().leftCols(m - subspace_rank);
  const Eigen::MatrixXcd proj = steering.conjugate() * noise;  // [L x (M-k)]
  Eigen::VectorXd out(steering.rows());
  for (Index l = 0; l < steering.rows(); ++l) {
    const double ratio =
        proj.row(l).squaredNorm() / steering.row(l).squaredNorm();
    out(l) = 1.0 / std::max(ratio, kProjectionFloor);
  }
  return out;
}

AngularSpectrum MusicSpectrum(const Spectrogram& spec,
                              const SteeringVectorSet& svs,
                              int subspace_rank) {
  Require(subspace_rank >= 1 && subspace_rank < spec.channels(),
          ErrorKind::kParameter, "MUSIC subspace rank must satisfy 1 <= k < M");
  const auto pairs = PairedBins(spec, svs);
  Eigen::VectorXd total = Eigen::VectorXd::Zero(svs.num_directions());
  for (const auto& [b, k] : pairs)
    total += MaxNormalize(
        MusicPseudospectrum(spec.bin(b), svs.at_freq(k), subspace_rank));
  total /= static_cast<double>(pairs.size());
  return AngularSpectrum{MaxNormalize(total), svs.grid(),
                         "music-" + std::to_string(subspace_rank)};
}

AngularSpectrum SrpPhatSpectrum(const Spectrogram& spec,
                                const SteeringVectorSet& svs) {
  Require(spec.channels() >= 2, ErrorKind::kParameter,
          "SRP-PHAT needs at least two microphones");
  const auto pairs = PairedBins(spec, svs);
  Eigen::VectorXd power = Eigen::VectorXd::Zero(svs.num_directions());
  for (const auto& [b, k] : pairs) {
    Eigen::MatrixXcd whitened = spec.bin(b);
    for (Index t = 0; t < whitened.cols(); ++t)
      for (Index m = 0; m < whitened.rows(); ++m) {
        const double mag = std::abs(whitened(m, t));
        whitened(m, t) = mag > 0.0 ? whitened(m, t) / mag : Complex(0.0, 0.0);
      }
    Eigen::MatrixXcd phase = svs.at_freq(k);
    for (Index l = 0; l < phase.rows(); ++l)
      for (Index m = 0; m < phase.cols(); ++m) {
        const double mag = std::abs(phase(l, m));
        phase(l, m) = mag > 0.0 ? phase(l, m) / mag : Complex(0.0, 0.0);
      }
    power += (phase.conjugate() * whitened).rowwise().squaredNorm();
  }
  return AngularSpectrum{MaxNormalize(power), svs.grid(), "srp-phat"};
}

}  // namespace shamans
