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

#include "shamans/stable.hpp"

#include <algorithm>
#include <array>
#include <iostream>
#include <random>

namespace shamans {
namespace {

constexpr int kAlphaDirections = 8;
constexpr std::array<double, 4> kAlphaThetas = {0.1, 0.5, 1.0, 2.0};
constexpr std::uint64_t kAlphaSeed = 0x5eed0a1fa;
constexpr double kAlphaMin = 0.4;
constexpr double kAlphaMax = 2.0;
// Below this modulus the empirical characteristic function is noise.
constexpr double kCharFloor = 1e-6;

double Median(std::vector<double> v) {
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

// Slope of log(-log|phi|) against log(theta) for one projection, or NaN if
// the projection carries no usable spread.
double DirectionSlope(const std::vector<double>& y) {
  std::vector<double> mags(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) mags[i] = std::abs(y[i]);
  double s = Median(mags);
  if (s <= 0.0) {
    double sum = 0.0;
    for (double v : mags) sum += v;
    s = sum / static_cast<double>(mags.size());
  }
  if (s <= 0.0) return std::numeric_limits<double>::quiet_NaN();

  std::vector<double> xs, ys;
  for (double theta : kAlphaThetas) {
    double re = 0.0, im = 0.0;
    for (double v : y) {
      re += std::cos(theta * v / s);
      im += std::sin(theta * v / s);
    }
    const double n = static_cast<double>(y.size());
    const double phi = std::hypot(re / n, im / n);
    const double g = -std::log(std::min(phi, 1.0));
    // A projection whose characteristic function never decays has no tail.
    if (g <= 1e-12) return kAlphaMax;
    if (phi < kCharFloor) continue;
    xs.push_back(std::log(theta));
    ys.push_back(std::log(g));
  }
  if (xs.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i] / n;
    my += ys[i] / n;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace

void SolverConfig::Validate() const {
  Require(std::isfinite(beta), ErrorKind::kParameter, "beta must be finite");
  Require(sparsity_lambda >= 0.0, ErrorKind::kParameter,
          "sparsity lambda must be nonnegative");
  Require(iterations >= 1, ErrorKind::kParameter,
          "at least one iteration is required");
  Require(p_norm > 0.0, ErrorKind::kParameter, "p must be positive");
  Require(sv_reference_l1 >= 0.0, ErrorKind::kParameter,
          "SV reference norm must be nonnegative");
  Require(alpha_override == 0.0 ||
              (alpha_override > 0.0 && alpha_override <= 2.0),
          ErrorKind::kParameter, "alpha override must lie in (0, 2]");
}

AlphaParam EstimateAlpha(const Spectrogram& spec) {
  const Index m = spec.channels();
  std::mt19937_64 rng(kAlphaSeed);
  std::normal_distribution<double> normal;
  std::vector<Eigen::VectorXcd> dirs;
  for (int k = 0; k < kAlphaDirections; ++k) {
    Eigen::VectorXcd u(m);
    for (Index i = 0; i < m; ++i) u(i) = Complex(normal(rng), normal(rng));
    dirs.push_back(u.normalized());
  }

  std::vector<std::vector<double>> proj(kAlphaDirections);
  bool any_nonzero = false;
  for (Index f = 1; f < spec.num_freqs(); ++f) {
    const Eigen::MatrixXcd& x = spec.bin(f);
    for (Index t = 0; t < spec.num_frames(); ++t) {
      if (!spec.frame_valid(f, t)) continue;
      const auto col = x.col(t);
      if (col.squaredNorm() == 0.0) continue;
      any_nonzero = true;
      for (int k = 0; k < kAlphaDirections; ++k)
        proj[k].push_back(dirs[k].dot(col).real());
    }
  }
  Require(any_nonzero, ErrorKind::kNumerical,
          "cannot estimate alpha from an all-zero spectrogram");
  Require(proj[0].size() >= 100, ErrorKind::kNumerical,
          "alpha estimation needs at least 100 time-frequency samples");

  double sum = 0.0;
  int used = 0;
  for (const auto& y : proj) {
    const double slope = DirectionSlope(y);
    if (std::isnan(slope)) continue;
    sum += slope;
    ++used;
  }
  Require(used > 0, ErrorKind::kNumerical,
          "observations carry no spread for alpha estimation");
  return AlphaParam(std::clamp(sum / used, kAlphaMin, kAlphaMax));
}

Spectrogram NormalizeObservations(const Spectrogram& spec, double p) {
  Require(p > 0.0 && std::isfinite(p), ErrorKind::kParameter,
          "p must be positive");
  std::vector<Eigen::MatrixXcd> bins = spec.bins();
  std::vector<Eigen::Array<bool, Eigen::Dynamic, 1>> mask(
      bins.size(),
      Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(spec.num_frames(), true));
  for (std::size_t f = 0; f < bins.size(); ++f) {
    for (Index t = 0; t < spec.num_frames(); ++t) {
      auto col = bins[f].col(t);
      const double norm_p = col.cwiseAbs().array().pow(p).sum();
      if (norm_p > 0.0 && spec.frame_valid(static_cast<Index>(f), t)) {
        col /= norm_p;
      } else {
        mask[f](t) = false;
      }
    }
  }
  Spectrogram out(std::move(bins), spec.sample_rate(), spec.frame_size(),
                  spec.hop());
  out.set_frame_mask(std::move(mask));
  return out;
}

std::vector<Index> PairBins(const Spectrogram& spec,
                            const std::vector<double>& freqs_hz) {
  const double spacing =
      static_cast<double>(spec.sample_rate()) / spec.frame_size();
  std::vector<Index> bins;
  bins.reserve(freqs_hz.size());
  for (double f : freqs_hz) {
    const auto k = static_cast<Index>(std::llround(f / spacing));
    Require(k >= 0 && k < spec.num_freqs() &&
                std::abs(spec.freq_hz(k) - f) <= 1e-6,
            ErrorKind::kShape,
            "no spectrogram bin at " + std::to_string(f) + " Hz");
    bins.push_back(k);
  }
  return bins;
}

Eigen::VectorXd LevyEstimator(const Spectrogram& spec,
                              const NormalizedSVSet& svs, AlphaParam alpha) {
  Require(spec.channels() == svs.num_mics(), ErrorKind::kShape,
          "spectrogram and SVs disagree on the microphone count");
  const std::vector<Index> bins = PairBins(spec, svs.freqs_hz());
  const Index l_count = svs.num_directions();
  const double inv_scale = std::pow(2.0, -1.0 / alpha.value());
  Eigen::VectorXd out(svs.num_freqs() * l_count);
  Index clamped = 0;
  for (Index f = 0; f < svs.num_freqs(); ++f) {
    const Index b = bins[f];
    const Eigen::MatrixXcd& x = spec.bin(b);
    const Eigen::MatrixXd proj =
        (svs.at_freq(f).conjugate() * x).real() * inv_scale;
    Eigen::VectorXd re = Eigen::VectorXd::Zero(l_count);
    Eigen::VectorXd im = Eigen::VectorXd::Zero(l_count);
    Index used = 0;
    for (Index t = 0; t < x.cols(); ++t) {
      if (!spec.frame_valid(b, t) || x.col(t).squaredNorm() == 0.0) continue;
      ++used;
      re += proj.col(t).array().cos().matrix();
      im += proj.col(t).array().sin().matrix();
    }
    for (Index l = 0; l < l_count; ++l) {
      double value = 0.0;
      if (used > 0) {
        double mod = std::hypot(re(l), im(l)) / static_cast<double>(used);
        if (mod < 1e-300) {
          mod = 1e-300;
          ++clamped;
        }
        value = std::max(0.0, -2.0 * std::log(mod));
      }
      out(f * l_count + l) = value;
    }
  }
  if (clamped > 0)
    std::clog << "warning: Levy estimator clamped " << clamped
              << " vanishing characteristic-function averages\n";
  return out;
}

Eigen::MatrixXd BuildPsi(const NormalizedSVSet& svs, AlphaParam alpha) {
  const Index l_count = svs.num_directions();
  Eigen::MatrixXd psi(svs.num_freqs() * l_count, l_count);
  for (Index f = 0; f < svs.num_freqs(); ++f)
    psi.middleRows(f * l_count, l_count) =
        PsiBlock<double>(svs.at_freq(f), alpha.value());
  return psi;
}

SpatialMeasure MultiplicativeUpdate(const LevySketch& sketch,
                                    const SolverConfig& config,
                                    const DoaGrid& grid) {
  config.Validate();
  Require(sketch.psi.cols() == grid.size(), ErrorKind::kShape,
          "Psi columns must match the grid size");
  MultiplicativeUpdater<double> updater(sketch.psi, sketch.i_hat, config.beta,
                                        config.sparsity_lambda);
  updater.Run(config.iterations);
  return SpatialMeasure{updater.upsilon(), grid};
}

std::vector<double> LocalizationFreqs(const Spectrogram& spec) {
  std::vector<double> freqs;
  for (Index f = 1; f < spec.num_freqs(); ++f) freqs.push_back(spec.freq_hz(f));
  Require(!freqs.empty(), ErrorKind::kShape,
          "spectrogram has no bins above DC");
  return freqs;
}

namespace {

SteeringVectorSet MatchedSvs(const Spectrogram& spec,
                             const SteeringVectorSet& svs) {
  Require(spec.channels() == svs.num_mics(), ErrorKind::kShape,
          "spectrogram has " + std::to_string(spec.channels()) +
              " channels but SVs have " + std::to_string(svs.num_mics()) +
              " microphones");
  std::vector<Index> idx;
  for (double f : LocalizationFreqs(spec)) {
    const Index k = svs.FindFreq(f);
    Require(k >= 0, ErrorKind::kShape,
            "no steering vectors at " + std::to_string(f) + " Hz");
    idx.push_back(k);
  }
  return svs.SelectFreqs(idx);
}

}  // namespace

LevySketch BuildSketch(const Spectrogram& normalized_spec,
                       const SteeringVectorSet& svs, AlphaParam alpha,
                       double sv_reference_l1) {
  SteeringVectorSet used = MatchedSvs(normalized_spec, svs);
  double gain = 1.0;
  if (sv_reference_l1 > 0.0) {
    double total = 0.0;
    for (const auto& block : used.values())
      total += block.cwiseAbs().sum();
    const double mean_l1 =
        total / static_cast<double>(used.num_freqs() * used.num_directions());
    gain = sv_reference_l1 / mean_l1;
    used = used.Scaled(gain);
  }
  const NormalizedSVSet normalized = NormalizeSvs(used);
  LevySketch sketch;
  sketch.alpha = alpha;
  sketch.num_freqs = used.num_freqs();
  sketch.sv_gain = gain;
  sketch.i_hat = LevyEstimator(normalized_spec, normalized, alpha);
  sketch.psi = BuildPsi(normalized, alpha);
  return sketch;
}

ShamansResult ShamansLocalize(const Spectrogram& spec,
                              const SteeringVectorSet& svs,
                              const SolverConfig& config) {
  config.Validate();
  const AlphaParam alpha = config.alpha_override > 0.0
                               ? AlphaParam(config.alpha_override)
                               : EstimateAlpha(spec);
  Require(config.p_norm < alpha.value(), ErrorKind::kParameter,
          "p = " + std::to_string(config.p_norm) +
              " must be below the estimated alpha = " +
              std::to_string(alpha.value()));
  const Spectrogram normalized = NormalizeObservations(spec, config.p_norm);
  const LevySketch sketch =
      BuildSketch(normalized, svs, alpha, config.sv_reference_l1);

  ShamansResult result;
  result.measure = MultiplicativeUpdate(sketch, config, svs.grid());
  result.alpha = alpha.value();
  result.freqs_used = sketch.num_freqs;
  result.frames = spec.num_frames();
  result.sv_gain = sketch.sv_gain;
  return result;
}

}  // namespace shamans
