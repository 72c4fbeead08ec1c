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

#include <cmath>
#include <functional>
#include <numeric>
#include <random>

#include <doctest.h>

#include "shamans/baselines.hpp"
#include "shamans/scenes.hpp"
#include "test_util.hpp"

using namespace shamans;
using shamans::testing::RandomComplex;
using shamans::testing::ThrowsKind;

namespace {

struct Setup {
  SteeringVectorSet svs;
  Spectrogram spec;
};

Setup DeskScene(std::vector<int> indices, double snr_db, std::uint64_t seed) {
  std::vector<double> freqs;
  for (int f = 0; f <= 128; ++f) freqs.push_back(f * 62.5);
  SteeringVectorSet svs = AlgebraicSvs(
      ArrayGeometry::Random(6, 0.1, 500 + seed), DoaGrid::Uniform(60), freqs);
  SceneSpec spec;
  spec.source_indices = std::move(indices);
  spec.snr_db = snr_db;
  spec.seed = seed;
  Spectrogram x = SynthScene(spec, svs, StftParams{}).spectrogram;
  return {std::move(svs), std::move(x)};
}

Index Argmax(const Eigen::VectorXd& v) {
  Index i = 0;
  v.maxCoeff(&i);
  return i;
}

Spectrogram Transform(const Spectrogram& x,
                      const std::function<void(Index, Eigen::MatrixXcd&)>& fn) {
  Spectrogram out = x;
  for (Index f = 0; f < out.num_freqs(); ++f) fn(f, out.bin(f));
  return out;
}

}  // namespace

TEST_CASE("MUSIC-1 and SRP-PHAT find a noiseless source") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const int index = static_cast<int>(13 * seed + 4) % 60;
    const Setup s = DeskScene({index}, std::numeric_limits<double>::infinity(), seed);
    const AngularSpectrum music = MusicSpectrum(s.spec, s.svs, 1);
    CHECK(Argmax(music.values) == index);
    CHECK(music.values.maxCoeff() == 1.0);
    CHECK(music.method_tag == "music-1");
    const AngularSpectrum srp = SrpPhatSpectrum(s.spec, s.svs);
    CHECK(Argmax(srp.values) == index);
    CHECK(srp.values.maxCoeff() == 1.0);
    CHECK(srp.method_tag == "srp-phat");
  }
}

TEST_CASE("MUSIC on white noise is flat") {
  const Setup s = DeskScene({}, 0.0, 9);
  const Eigen::VectorXd v = MusicSpectrum(s.spec, s.svs, 1).values;
  CHECK(v.maxCoeff() / v.minCoeff() < 2.0);
}

TEST_CASE("MUSIC-2 separates two orthogonal sources") {
  std::mt19937_64 rng(4);
  Eigen::MatrixXcd a = RandomComplex(8, 4, rng);
  const Eigen::MatrixXcd q =
      Eigen::HouseholderQR<Eigen::MatrixXcd>(RandomComplex(4, 4, rng))
          .householderQ();
  a.row(2) = q.col(0).transpose();
  a.row(5) = q.col(1).transpose();
  const SteeringVectorSet svs({a, a}, DoaGrid::Uniform(8), {0.0, 62.5},
                              SvSource::kAlgebraic);
  const Eigen::MatrixXcd s = RandomComplex(2, 200, rng);
  Eigen::MatrixXcd x = a.row(2).transpose() * s.row(0) +
                       a.row(5).transpose() * s.row(1);
  const Spectrogram spec({Eigen::MatrixXcd::Zero(4, 200), x}, 48000, 768, 384);
  const Eigen::VectorXd v = MusicSpectrum(spec, svs, 2).values;
  std::vector<Index> order(8);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](Index i, Index j) { return v(i) > v(j); });
  CHECK(std::min(order[0], order[1]) == 2);
  CHECK(std::max(order[0], order[1]) == 5);
}

TEST_CASE("MUSIC pseudospectrum diverges on an exact rank-k mixture") {
  std::mt19937_64 rng(6);
  const Eigen::MatrixXcd a = RandomComplex(10, 5, rng);
  const Eigen::MatrixXcd x = a.row(3).transpose() * RandomComplex(1, 64, rng) +
                             a.row(7).transpose() * RandomComplex(1, 64, rng);
  const Eigen::VectorXd p = MusicPseudospectrum(x, a, 2);
  CHECK(p(3) >= 1e6);
  CHECK(p(7) >= 1e6);
  CHECK(p(3) <= 1e12 * a.row(3).squaredNorm());
}

TEST_CASE("MUSIC rejects subspace ranks outside [1, M)") {
  const Setup s = DeskScene({3}, 20.0, 1);
  for (int k : {0, 6, 7})
    CHECK(ThrowsKind([&] { MusicSpectrum(s.spec, s.svs, k); },
                     ErrorKind::kParameter));
}

TEST_CASE("SRP-PHAT ignores a common delay") {
  const Setup s = DeskScene({21}, 20.0, 2);
  const double tau = 3.7e-4;
  const Spectrogram shifted = Transform(s.spec, [&](Index f, Eigen::MatrixXcd& b) {
    b *= std::exp(Complex(0.0, -2.0 * kPi * s.spec.freq_hz(f) * tau));
  });
  const Eigen::VectorXd a = SrpPhatSpectrum(s.spec, s.svs).values;
  const Eigen::VectorXd b = SrpPhatSpectrum(shifted, s.svs).values;
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("SRP-PHAT ignores per-channel gain") {
  const Setup s = DeskScene({44}, 20.0, 3);
  const Spectrogram louder = Transform(
      s.spec, [](Index, Eigen::MatrixXcd& b) { b.row(2) *= 10.0; });
  const Eigen::VectorXd a = SrpPhatSpectrum(s.spec, s.svs).values;
  const Eigen::VectorXd b = SrpPhatSpectrum(louder, s.svs).values;
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("Both spectra ignore global complex scaling") {
  const Setup s = DeskScene({8, 30}, 10.0, 4);
  for (Complex c : {Complex(0.01, 0.0), Complex(-3.0, 4.0), Complex(0.0, 250.0)}) {
    const Spectrogram scaled =
        Transform(s.spec, [&](Index, Eigen::MatrixXcd& b) { b *= c; });
    const Eigen::VectorXd m0 = MusicSpectrum(s.spec, s.svs, 2).values;
    const Eigen::VectorXd m1 = MusicSpectrum(scaled, s.svs, 2).values;
    CHECK(Argmax(m0) == Argmax(m1));
    CHECK((m0 - m1).cwiseAbs().maxCoeff() < 1e-6);
    const Eigen::VectorXd p0 = SrpPhatSpectrum(s.spec, s.svs).values;
    const Eigen::VectorXd p1 = SrpPhatSpectrum(scaled, s.svs).values;
    CHECK((p0 - p1).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("Max normalization") {
  CHECK(MaxNormalize(Eigen::VectorXd::Zero(4)) == Eigen::VectorXd::Zero(4));
  const Eigen::VectorXd v = (Eigen::VectorXd(3) << 1.0, 4.0, 2.0).finished();
  CHECK(MaxNormalize(v) == (Eigen::VectorXd(3) << 0.25, 1.0, 0.5).finished());
}

TEST_CASE("Baselines reject mismatched shapes") {
  const Setup s = DeskScene({3}, 20.0, 1);
  const SteeringVectorSet few = s.svs.SelectFreqs({0, 1, 2});
  CHECK(ThrowsKind([&] { SrpPhatSpectrum(s.spec, few); }, ErrorKind::kShape));
  CHECK(ThrowsKind([&] { MusicSpectrum(s.spec, few, 1); }, ErrorKind::kShape));
}
