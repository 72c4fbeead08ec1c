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

#ifndef SHAMANS_BASELINES_HPP_
#define SHAMANS_BASELINES_HPP_

#include <string>

#include "shamans/signal.hpp"
#include "shamans/steering.hpp"

namespace shamans {

struct AngularSpectrum {
  Eigen::VectorXd values;  // [L]
  DoaGrid grid;
  std::string method_tag;
};

// Wideband MUSIC. Per non-DC bin: R_f = X X^H / T + 1e-12 I, noise subspace
// from the M - k smallest eigenvectors, pseudospectrum
// ||a||^2 / ||E_n^H a||^2 (denominator floored at 1e-12). Each bin is
// max-normalized before averaging; the average is max-normalized again.
AngularSpectrum MusicSpectrum(const Spectrogram& spec,
                              const SteeringVectorSet& svs, int subspace_rank);

// Pre-normalization MUSIC pseudospectrum of a single bin.
Eigen::VectorXd MusicPseudospectrum(const Eigen::MatrixXcd& observations,
                                    const Eigen::MatrixXcd& steering,
                                    int subspace_rank);

// Frequency-domain SRP-PHAT with phase-only steering vectors, summed over
// all non-DC bins and frames, then max-normalized.
AngularSpectrum SrpPhatSpectrum(const Spectrogram& spec,
                                const SteeringVectorSet& svs);

// Divides by the maximum (no-op for an all-zero vector).
Eigen::VectorXd MaxNormalize(const Eigen::VectorXd& values);

}  // namespace shamans

#endif  // SHAMANS_BASELINES_HPP_
