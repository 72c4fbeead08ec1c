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

#ifndef SHAMANS_SIGNAL_HPP_
#define SHAMANS_SIGNAL_HPP_

#include <filesystem>
#include <vector>

#include "shamans/common.hpp"

namespace shamans {

// Multichannel time-domain audio. Rows are channels.
struct AudioBuffer {
  Eigen::MatrixXd samples;
  int sample_rate = 0;

  Index channels() const { return samples.rows(); }
  Index length() const { return samples.cols(); }

  // Throws kParameter on empty buffers, non-positive rates, or NaN/Inf.
  void Validate() const;
};

enum class WavEncoding { kPcm16, kFloat32 };

AudioBuffer ReadWav(const std::filesystem::path& path);
void WriteWav(const AudioBuffer& audio, const std::filesystem::path& path,
              WavEncoding encoding = WavEncoding::kFloat32);

struct StftParams {
  int frame_size = 768;
  int hop = 384;
  double f_max = 8000.0;
};

// One-sided multichannel STFT. Bin f holds an [M x T] matrix; bins above the
// analysis cutoff are not stored, so num_freqs() may be smaller than
// frame_size / 2 + 1. Bin f sits at f * sample_rate / frame_size Hz.
class Spectrogram {
 public:
  Spectrogram() = default;
  Spectrogram(std::vector<Eigen::MatrixXcd> bins, int sample_rate,
              int frame_size, int hop);

  Index channels() const { return bins_.empty() ? 0 : bins_[0].rows(); }
  Index num_freqs() const { return static_cast<Index>(bins_.size()); }
  Index num_frames() const { return bins_.empty() ? 0 : bins_[0].cols(); }

  const Eigen::MatrixXcd& bin(Index f) const { return bins_[f]; }
  Eigen::MatrixXcd& bin(Index f) { return bins_[f]; }
  const std::vector<Eigen::MatrixXcd>& bins() const { return bins_; }

  int sample_rate() const { return sample_rate_; }
  int frame_size() const { return frame_size_; }
  int hop() const { return hop_; }

  double freq_hz(Index f) const {
    return static_cast<double>(f) * sample_rate_ / frame_size_;
  }
  std::vector<double> freqs_hz() const;

  // Per-bin frame validity. Empty means every frame is valid.
  const std::vector<Eigen::Array<bool, Eigen::Dynamic, 1>>& frame_mask() const {
    return mask_;
  }
  void set_frame_mask(std::vector<Eigen::Array<bool, Eigen::Dynamic, 1>> mask);
  bool frame_valid(Index f, Index t) const {
    return mask_.empty() || mask_[f](t);
  }

  Spectrogram& operator*=(Complex scale);

 private:
  std::vector<Eigen::MatrixXcd> bins_;
  std::vector<Eigen::Array<bool, Eigen::Dynamic, 1>> mask_;
  int sample_rate_ = 0;
  int frame_size_ = 0;
  int hop_ = 0;
};

// Periodic Hann window, w[n] = 0.5 - 0.5 cos(2 pi n / N).
Eigen::VectorXd PeriodicHann(int length);

// Number of bins kept for a given cutoff: all k with k * fs / N <= f_max.
int RetainedBins(int frame_size, int sample_rate, double f_max);

Spectrogram Stft(const AudioBuffer& audio, const StftParams& params);

}  // namespace shamans

#endif  // SHAMANS_SIGNAL_HPP_
