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
#include <fstream>
#include <random>

#include <doctest.h>

#include "shamans/steering.hpp"
#include "shamans/svset_io.hpp"
#include "test_util.hpp"

using namespace shamans;
using shamans::testing::RandomComplex;
using shamans::testing::TempDir;
using shamans::testing::ThrowsKind;

namespace {

ArrayGeometry TwoMics(Eigen::Vector3d a, Eigen::Vector3d b) {
  ArrayGeometry g;
  g.mic_positions = {a, b};
  return g;
}

// Scalar loop: vectorized casts miss the tail element under GCC 11 -O3.
Eigen::MatrixXcd RoundF32(Eigen::MatrixXcd m) {
  for (Index i = 0; i < m.size(); ++i) {
    volatile float re = static_cast<float>(m(i).real());
    volatile float im = static_cast<float>(m(i).imag());
    m(i) = Complex(re, im);
  }
  return m;
}

SteeringVectorSet RandomSet(Index l, Index m, Index f, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Eigen::MatrixXcd> values;
  std::vector<double> freqs;
  for (Index k = 0; k < f; ++k) {
    // Rounded through float so the f32 payload is lossless.
    values.push_back(RoundF32(RandomComplex(l, m, rng)));
    freqs.push_back(125.0 * k);
  }
  return SteeringVectorSet(std::move(values),
                           DoaGrid::Uniform(static_cast<int>(l)), freqs,
                           SvSource::kMeasured);
}

double WrapPhase(double x) {
  x = std::fmod(x, 2.0 * kPi);
  if (x <= -kPi) x += 2.0 * kPi;
  if (x > kPi) x -= 2.0 * kPi;
  return x;
}

}  // namespace

TEST_CASE("Uniform grid spacing and validation") {
  const DoaGrid g = DoaGrid::Uniform(60);
  CHECK(g.size() == 60);
  CHECK(g.azimuths_deg[1] == doctest::Approx(6.0));
  CHECK(g.azimuths_deg[59] == doctest::Approx(354.0));
  CHECK_NOTHROW(g.Validate());
  CHECK((g.direction(15) - Eigen::Vector3d(0, 1, 0)).norm() < 1e-12);

  DoaGrid bad = g;
  bad.azimuths_deg[3] = bad.azimuths_deg[2];
  CHECK(ThrowsKind([&] { bad.Validate(); }, ErrorKind::kShape));
  bad = g;
  bad.azimuths_deg.back() = 360.0;
  CHECK(ThrowsKind([&] { bad.Validate(); }, ErrorKind::kShape));
}

TEST_CASE("Algebraic SVs at DC are real 1/(4 pi r)") {
  const ArrayGeometry geom = TwoMics({0.03, 0.01, 0}, {-0.02, 0.04, 0.01});
  const DoaGrid grid = DoaGrid::Uniform(12);
  const SteeringVectorSet svs = AlgebraicSvs(geom, grid, {0.0});
  for (Index l = 0; l < 12; ++l)
    for (Index m = 0; m < 2; ++m) {
      const double r = (grid.position(l) - geom.mic_positions[m]).norm();
      CHECK(svs(l, m, 0).imag() == 0.0);
      CHECK(svs(l, m, 0).real() == doctest::Approx(1.0 / (4.0 * kPi * r)));
    }
}

TEST_CASE("Broadside source reaches symmetric microphones identically") {
  const ArrayGeometry geom = TwoMics({0.05, 0, 0}, {-0.05, 0, 0});
  const DoaGrid grid = DoaGrid::Uniform(4);  // index 1 at 90 degrees
  const SteeringVectorSet svs = AlgebraicSvs(geom, grid, {0, 500, 4000, 7937.5});
  for (Index f = 0; f < 4; ++f)
    CHECK(std::abs(svs(1, 0, f) - svs(1, 1, f)) < 1e-15);
}

TEST_CASE("Green's function scalar oracle at 1 kHz") {
  const ArrayGeometry geom = TwoMics({0, 0, 0}, {0.05, 0.02, 0});
  const DoaGrid grid = DoaGrid::Uniform(8);
  const SteeringVectorSet svs = AlgebraicSvs(geom, grid, {1000.0}, 343.0);
  const Complex a = svs(3, 0, 0);
  CHECK(std::abs(a) == doctest::Approx(1.0 / (4.0 * kPi * 1.7)).epsilon(1e-12));
  const double expect = WrapPhase(-2.0 * kPi * 1000.0 * 1.7 / 343.0);
  CHECK(std::abs(WrapPhase(std::arg(a) - expect)) < 1e-9);
}

TEST_CASE("Algebraic magnitude is frequency independent and phase linear") {
  const ArrayGeometry geom = ArrayGeometry::Random(5, 0.08, 21);
  const DoaGrid grid = DoaGrid::Uniform(10);
  std::vector<double> freqs;
  for (int k = 0; k < 20; ++k) freqs.push_back(50.0 * k);
  const SteeringVectorSet svs = AlgebraicSvs(geom, grid, freqs);
  for (Index l = 0; l < 10; ++l)
    for (Index m = 0; m < 5; ++m) {
      const double step = WrapPhase(std::arg(svs(l, m, 1) / svs(l, m, 0)));
      for (Index f = 1; f < 20; ++f) {
        CHECK(std::abs(svs(l, m, f)) ==
              doctest::Approx(std::abs(svs(l, m, 0))).epsilon(1e-12));
        const double d = WrapPhase(std::arg(svs(l, m, f) / svs(l, m, f - 1)));
        CHECK(std::abs(WrapPhase(d - step)) < 1e-9);
      }
    }
}

TEST_CASE("Algebraic SVs reject degenerate geometry") {
  const DoaGrid grid = DoaGrid::Uniform(4, 0.0, 0.05);
  const ArrayGeometry on_grid = TwoMics({0.05, 0, 0}, {0, 0, 0.01});
  CHECK(ThrowsKind([&] { AlgebraicSvs(on_grid, grid, {100.0}); },
                   ErrorKind::kGeometry));
  const ArrayGeometry coincident = TwoMics({0.01, 0, 0}, {0.01, 0, 0});
  CHECK(ThrowsKind([&] { coincident.Validate(); }, ErrorKind::kGeometry));
}

TEST_CASE("Random geometry respects radius and spacing") {
  const ArrayGeometry g = ArrayGeometry::Random(6, 0.1, 4, 0.02);
  CHECK(g.size() == 6);
  CHECK(g.max_radius() <= 0.1);
  for (Index i = 0; i < 6; ++i)
    for (Index j = i + 1; j < 6; ++j)
      CHECK((g.mic_positions[i] - g.mic_positions[j]).norm() >= 0.02);
  const ArrayGeometry again = ArrayGeometry::Random(6, 0.1, 4, 0.02);
  for (Index i = 0; i < 6; ++i)
    CHECK(g.mic_positions[i] == again.mic_positions[i]);
}

TEST_CASE("NormalizeSvs divides by the squared norm") {
  std::vector<Eigen::MatrixXcd> v(1, Eigen::MatrixXcd(3, 2));
  v[0] << Complex(1, 0), Complex(0, 0),  // unit norm
      Complex(2, 0), Complex(0, 0),      // [2, 0]
      Complex(0.6, 0.0), Complex(0.0, 0.8);
  const SteeringVectorSet svs(v, DoaGrid::Uniform(3), {100.0},
                              SvSource::kMeasured);
  const NormalizedSVSet n = NormalizeSvs(svs);
  CHECK(n.at_freq(0).row(0) == v[0].row(0));
  CHECK(n.at_freq(0)(1, 0) == Complex(0.5, 0.0));
  CHECK(n.at_freq(0)(1, 1) == Complex(0.0, 0.0));
  CHECK((n.at_freq(0).row(2) - v[0].row(2)).norm() < 1e-15);
}

TEST_CASE("Normalized norm identity over random draws") {
  const SteeringVectorSet svs = RandomSet(100, 4, 1, 8);
  const NormalizedSVSet n = NormalizeSvs(svs);
  for (Index l = 0; l < 100; ++l) {
    const Eigen::VectorXcd a = svs.at_freq(0).row(l).transpose();
    const Eigen::VectorXcd t = n.at_freq(0).row(l).transpose();
    CHECK(std::abs(t.norm() * a.norm() - 1.0) < 1e-12);
    CHECK((t - a / a.squaredNorm()).norm() < 1e-15 * t.norm() + 1e-300);
  }
}

TEST_CASE("Steering-vector sets reject identically zero vectors") {
  std::vector<Eigen::MatrixXcd> v(1, Eigen::MatrixXcd::Ones(2, 2));
  v[0].row(1).setZero();
  CHECK(ThrowsKind(
      [&] {
        SteeringVectorSet(v, DoaGrid::Uniform(2), {0.0}, SvSource::kMeasured);
      },
      ErrorKind::kShape));
}

TEST_CASE("FindFreq, SelectFreqs and Scaled") {
  const SteeringVectorSet svs = RandomSet(4, 3, 5, 2);
  CHECK(svs.FindFreq(250.0) == 2);
  CHECK(svs.FindFreq(251.0) == -1);
  const SteeringVectorSet sub = svs.SelectFreqs({1, 3});
  CHECK(sub.num_freqs() == 2);
  CHECK(sub.freqs_hz()[1] == 375.0);
  CHECK(sub.at_freq(1) == svs.at_freq(3));
  const SteeringVectorSet twice = svs.Scaled(2.0);
  CHECK(twice.at_freq(4) == 2.0 * svs.at_freq(4));
}

TEST_CASE("SVSET round trip is bit-exact") {
  TempDir dir("svset");
  SteeringVectorSet svs = RandomSet(7, 3, 4, 99);
  SaveSvset(svs, dir / "a.svset");
  const SteeringVectorSet back = LoadSvset(dir / "a.svset");
  CHECK(back.grid() == svs.grid());
  CHECK(back.freqs_hz() == svs.freqs_hz());
  CHECK(back.tag() == svs.tag());
  for (Index f = 0; f < 4; ++f) CHECK(back.at_freq(f) == svs.at_freq(f));

  const SteeringVectorSet alg = AlgebraicSvs(ArrayGeometry::Random(4, 0.05, 1),
                                             DoaGrid::Uniform(6), {0, 1000});
  SaveSvset(alg, dir / "alg.svset");
  CHECK(LoadSvset(dir / "alg.svset").tag() == SvSource::kAlgebraic);
}

TEST_CASE("SVSET loader reports malformed files as format errors") {
  TempDir dir("svset");
  { std::ofstream(dir / "empty.svset"); }
  CHECK(ThrowsKind([&] { LoadSvset(dir / "empty.svset"); }, ErrorKind::kFormat));
  CHECK(ThrowsKind([&] { LoadSvset(dir / "none.svset"); }, ErrorKind::kIo));

  SaveSvset(RandomSet(5, 2, 3, 4), dir / "full.svset");
  const auto size = std::filesystem::file_size(dir / "full.svset");
  std::filesystem::copy_file(dir / "full.svset", dir / "short.svset");
  std::filesystem::resize_file(dir / "short.svset", size - 8);
  CHECK(ThrowsKind([&] { LoadSvset(dir / "short.svset"); }, ErrorKind::kFormat));

  auto patch = [&](const char* name, std::size_t offset, std::uint32_t value) {
    std::filesystem::copy_file(dir / "full.svset", dir / name);
    std::fstream f(dir / name, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(static_cast<std::streamoff>(offset));
    f.write(reinterpret_cast<const char*>(&value), 4);
  };
  patch("magic.svset", 0, 0x58585858u);
  CHECK(ThrowsKind([&] { LoadSvset(dir / "magic.svset"); }, ErrorKind::kFormat));
  patch("version.svset", 4, 7u);
  CHECK(ThrowsKind([&] { LoadSvset(dir / "version.svset"); }, ErrorKind::kFormat));
  patch("overflow.svset", 8, 0xffffffffu);  // L
  CHECK(ThrowsKind([&] { LoadSvset(dir / "overflow.svset"); }, ErrorKind::kFormat));
}

TEST_CASE("LoadSvset refuses fitted-model containers") {
  TempDir dir("svset");
  SvsetRecord r;
  r.azimuths = {0, 1};
  r.freqs = {100};
  r.num_mics = 1;
  r.values = {Eigen::MatrixXcd::Ones(2, 1)};
  r.tag = static_cast<std::uint8_t>(SvSource::kShCoefficients);
  WriteSvsetRecord(r, dir / "model.svset");
  CHECK(ThrowsKind([&] { LoadSvset(dir / "model.svset"); }, ErrorKind::kFormat));
}
