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

#include "shamans/signal.hpp"

#include <cmath>

#include <unsupported/Eigen/FFT>

namespace shamans {

void AudioBuffer::Validate() const {
  Require(samples.rows() >= 1 && samples.cols() >= 1, ErrorKind::kParameter,
          "audio buffer is empty");
  Require(sample_rate > 0, ErrorKind::kParameter,
          "sample rate must be positive");
  Require(samples.allFinite(), ErrorKind::kParameter,
          "audio buffer contains non-finite samples");
}

Spectrogram::Spectrogram(std::vector<Eigen::MatrixXcd> bins, int sample_rate,
                         int frame_size, int hop)
    : bins_(std::move(bins)),
      sample_rate_(sample_rate),
      frame_size_(frame_size),
      hop_(hop) {
  Require(!bins_.empty(), ErrorKind::kShape, "spectrogram has no bins");
  Require(sample_rate > 0 && frame_size > 0 && hop > 0, ErrorKind::kParameter,
          "spectrogram needs positive rate, frame size and hop");
  Require(static_cast<int>(bins_.size()) <= frame_size / 2 + 1,
          ErrorKind::kShape, "more bins than a one-sided spectrum holds");
  const Index m = bins_[0].rows();
  const Index t = bins_[0].cols();
  Require(m >= 1 && t >= 1, ErrorKind::kShape, "spectrogram bin is empty");
  for (const auto& b : bins_) {
    Require(b.rows() == m && b.cols() == t, ErrorKind::kShape,
            "spectrogram bins disagree in shape");
    Require(b.allFinite(), ErrorKind::kParameter,
            "spectrogram contains non-finite values");
  }
}

std::vector<double> Spectrogram::freqs_hz() const {
  std::vector<double> out(bins_.size());
  for (Index f = 0; f < num_freqs(); ++f) out[f] = freq_hz(f);
  return out;
}

void Spectrogram::set_frame_mask(
    std::vector<Eigen::Array<bool, Eigen::Dynamic, 1>> mask) {
  if (!mask.empty()) {
    Require(static_cast<Index>(mask.size()) == num_freqs(), ErrorKind::kShape,
            "frame mask needs one entry per bin");
    for (const auto& m : mask)
      Require(m.size() == num_frames(), ErrorKind::kShape,
              "frame mask length differs from frame count");
  }
  mask_ = std::move(mask);
}

Spectrogram& Spectrogram::operator*=(Complex scale) {
  for (auto& b : bins_) b *= scale;
  return *this;
}

Eigen::VectorXd PeriodicHann(int length) {
  Eigen::VectorXd w(length);
  for (int n = 0; n < length; ++n)
    w(n) = 0.5 - 0.5 * std::cos(2.0 * kPi * n / length);
  return w;
}

int RetainedBins(int frame_size, int sample_rate, double f_max) {
  const int half = frame_size / 2;
  const double spacing = static_cast<double>(sample_rate) / frame_size;
  // Small slack so that f_max landing exactly on a bin keeps that bin.
  const int k = static_cast<int>(std::floor(f_max / spacing + 1e-9));
  return std::min(half, k) + 1;
}

Spectrogram Stft(const AudioBuffer& audio, const StftParams& params) {
  audio.Validate();
  const int n = params.frame_size;
  Require(n >= 2 && n % 2 == 0, ErrorKind::kParameter,
          "frame size must be even");
  Require(params.hop > 0 && params.hop <= n, ErrorKind::kParameter,
          "hop must lie in (0, frame_size]");
  Require(params.f_max > 0.0 && params.f_max <= audio.sample_rate / 2.0,
          ErrorKind::kParameter, "f_max must lie in (0, sample_rate / 2]");
  Require(audio.length() >= n, ErrorKind::kParameter,
          "signal shorter than one frame");

  const Index frames = (audio.length() - n) / params.hop + 1;
  const int num_bins = RetainedBins(n, audio.sample_rate, params.f_max);
  const Eigen::VectorXd window = PeriodicHann(n);

  std::vector<Eigen::MatrixXcd> bins(
      num_bins, Eigen::MatrixXcd::Zero(audio.channels(), frames));
  Eigen::FFT<double> fft;
  std::vector<double> frame(n);
  std::vector<Complex> spectrum;
  for (Index m = 0; m < audio.channels(); ++m) {
    for (Index t = 0; t < frames; ++t) {
      const Index start = t * params.hop;
      for (int s = 0; s < n; ++s)
        frame[s] = window(s) * audio.samples(m, start + s);
      fft.fwd(spectrum, frame);
      for (int f = 0; f < num_bins; ++f) bins[f](m, t) = spectrum[f];
    }
  }
  return Spectrogram(std::move(bins), audio.sample_rate, n, params.hop);
}

}  // namespace shamans
