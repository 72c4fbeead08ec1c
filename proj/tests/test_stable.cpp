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
#include <random>

#include <doctest.h>

#include "shamans/scenes.hpp"
#include "shamans/stable.hpp"
#include "test_util.hpp"

using namespace shamans;
using shamans::testing::ThrowsKind;

namespace {

constexpr int kRate = 48000;
constexpr int kFrame = 768;

Spectrogram MakeSpec(std::vector<Eigen::MatrixXcd> bins) {
  return Spectrogram(std::move(bins), kRate, kFrame, kFrame / 2);
}

// Scalar samples laid out as bin 1 of a single-channel spectrogram.
Spectrogram ScalarSpec(const std::vector<Complex>& samples) {
  Eigen::MatrixXcd row(1, static_cast<Index>(samples.size()));
  for (Index t = 0; t < row.cols(); ++t) row(0, t) = samples[t];
  return MakeSpec({Eigen::MatrixXcd::Zero(1, row.cols()), row});
}

// Independent samples in every entry of an [M x T] block per non-DC bin.
Spectrogram IidSpec(AlphaParam alpha, Index m, Index bins, Index frames,
                    std::uint64_t seed) {
  const auto s = SampleSas(alpha, 1.0, m * bins * frames, seed);
  std::vector<Eigen::MatrixXcd> out{Eigen::MatrixXcd::Zero(m, frames)};
  Index k = 0;
  for (Index f = 0; f < bins; ++f) {
    Eigen::MatrixXcd b(m, frames);
    for (Index t = 0; t < frames; ++t)
      for (Index i = 0; i < m; ++i) b(i, t) = s[k++];
    out.push_back(b);
  }
  return MakeSpec(std::move(out));
}

SteeringVectorSet SingleSv(const Eigen::MatrixXcd& rows, double freq) {
  return SteeringVectorSet({rows}, DoaGrid::Uniform(rows.rows()), {freq},
                           SvSource::kAlgebraic);
}

// Empirical Levy exponent -ln|E exp(i Re(x))|.
double EmpiricalExponent(const std::vector<Complex>& x) {
  Complex acc(0.0, 0.0);
  for (const auto& v : x) acc += std::exp(Complex(0.0, v.real()));
  return -std::log(std::abs(acc) / static_cast<double>(x.size()));
}

// Desk-scale scene on a 6-microphone, 10 cm array and a 6 degree grid.
struct DeskScene {
  SteeringVectorSet svs;
  Scene scene;
};

DeskScene MakeDeskScene(std::vector<int> indices, double snr_db,
                        std::uint64_t seed) {
  std::vector<double> freqs;
  for (int f = 0; f <= 128; ++f) freqs.push_back(f * 62.5);
  const auto geom = ArrayGeometry::Random(6, 0.1, 1000 + seed);
  SteeringVectorSet svs = AlgebraicSvs(geom, DoaGrid::Uniform(60), freqs);
  SceneSpec spec;
  spec.source_indices = std::move(indices);
  spec.snr_db = snr_db;
  spec.seed = seed;
  Scene scene = SynthScene(spec, svs, StftParams{});
  return {std::move(svs), std::move(scene)};
}

Index Argmax(const Eigen::VectorXd& v) {
  Index i = 0;
  v.maxCoeff(&i);
  return i;
}

Index CircularCells(Index a, Index b, Index l) {
  const Index d = std::abs(a - b) % l;
  return std::min(d, l - d);
}

}  // namespace

TEST_CASE("AlphaParam range") {
  CHECK(AlphaParam(2.0).is_gaussian());
  CHECK_FALSE(AlphaParam(1.5).is_gaussian());
  CHECK(ThrowsKind([] { AlphaParam(0.0); }, ErrorKind::kParameter));
  CHECK(ThrowsKind([] { AlphaParam(2.1); }, ErrorKind::kParameter));
  CHECK(ThrowsKind([] { AlphaParam(std::nan("")); }, ErrorKind::kParameter));
}

TEST_CASE("NoiseModel constant") {
  const NoiseModel n{0.5, 1.5};
  CHECK(n.c_alpha() == doctest::Approx(std::pow(0.25, 0.75)));
}

TEST_CASE("Sampler: zero scale, determinism, Gaussian exponent") {
  for (const auto& v : SampleSas(AlphaParam(1.2), 0.0, 1000, 3))
    CHECK(v == Complex(0.0, 0.0));
  CHECK(SampleSas(AlphaParam(1.5), 1.0, 500, 9) ==
        SampleSas(AlphaParam(1.5), 1.0, 500, 9));
  CHECK(SampleSas(AlphaParam(1.5), 1.0, 500, 9) !=
        SampleSas(AlphaParam(1.5), 1.0, 500, 10));

  const auto g = SampleSas(AlphaParam(2.0), 0.8, 100000, 4);
  CHECK(EmpiricalExponent(g) == doctest::Approx(0.8).epsilon(0.05));
  // Real part variance of a Gaussian with exponent scale |theta|^2 is 2 scale.
  double var = 0.0;
  for (const auto& v : g) var += v.real() * v.real() / g.size();
  CHECK(var == doctest::Approx(1.6).epsilon(0.05));
}

TEST_CASE("Sampler matches its exponent convention for heavy tails") {
  for (double alpha : {1.0, 1.5}) {
    const auto s = SampleSas(AlphaParam(alpha), 0.5, 100000, 11);
    CHECK(EmpiricalExponent(s) == doctest::Approx(0.5).epsilon(0.05));
  }
}

TEST_CASE("Levy estimator recovers the scalar scale") {
  const auto s = SampleSas(AlphaParam(1.5), 0.7, 100000, 21);
  const auto svs = NormalizeSvs(SingleSv(Eigen::MatrixXcd::Ones(2, 1), 62.5));
  const Eigen::VectorXd i_hat =
      LevyEstimator(ScalarSpec(s), svs, AlphaParam(1.5));
  CHECK(i_hat(0) == doctest::Approx(0.7).epsilon(0.10));
}

TEST_CASE("Levy estimator vanishes without a usable phase") {
  const auto svs = NormalizeSvs(SingleSv(Eigen::MatrixXcd::Ones(2, 1), 62.5));
  const Eigen::VectorXd zero = LevyEstimator(
      ScalarSpec(std::vector<Complex>(50, Complex(0.0, 0.0))), svs,
      AlphaParam(1.5));
  CHECK(zero(0) == 0.0);

  std::vector<Complex> imag;
  for (int t = 0; t < 50; ++t) imag.emplace_back(0.0, 3.0 * t - 20.0);
  CHECK(LevyEstimator(ScalarSpec(imag), svs, AlphaParam(1.5))(0) == 0.0);
}

TEST_CASE("Levy estimator output is nonnegative and direction-major") {
  std::mt19937_64 rng(5);
  const Eigen::MatrixXcd a = shamans::testing::RandomComplex(7, 3, rng);
  const auto spec = IidSpec(AlphaParam(1.3), 3, 2, 200, 6);
  const SteeringVectorSet svs({a, a * 2.0}, DoaGrid::Uniform(7), {62.5, 125.0},
                              SvSource::kAlgebraic);
  const Eigen::VectorXd i_hat =
      LevyEstimator(spec, NormalizeSvs(svs), AlphaParam(1.3));
  CHECK(i_hat.size() == 14);
  CHECK(i_hat.minCoeff() >= 0.0);
  CHECK(ThrowsKind(
      [&] {
        LevyEstimator(spec, NormalizeSvs(SingleSv(a, 300.0)), AlphaParam(1.3));
      },
      ErrorKind::kShape));
}

TEST_CASE("Alpha estimation on Gaussian and Cauchy-like mixtures") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const double g = EstimateAlpha(IidSpec(AlphaParam(2.0), 2, 10, 5000, seed)).value();
    CHECK(g >= 1.85);
    CHECK(g <= 2.0);
    const double c = EstimateAlpha(IidSpec(AlphaParam(1.0), 2, 10, 5000, seed)).value();
    CHECK(c >= 0.9);
    CHECK(c <= 1.1);
  }
}

TEST_CASE("Alpha estimation degenerate inputs") {
  CHECK(EstimateAlpha(ScalarSpec(std::vector<Complex>(500, Complex(1.0, 2.0))))
            .value() == 2.0);
  CHECK(ThrowsKind(
      [] { EstimateAlpha(ScalarSpec(std::vector<Complex>(500))); },
      ErrorKind::kNumerical));
}

TEST_CASE("Observation normalization") {
  Eigen::MatrixXcd b(2, 3);
  b << 1.0, 2.0, 0.0, 0.0, 2.0, 0.0;
  const Spectrogram out =
      NormalizeObservations(MakeSpec({Eigen::MatrixXcd::Zero(2, 3), b}), 1.0);
  CHECK(out.bin(1)(0, 0) == Complex(1.0, 0.0));
  CHECK(out.bin(1)(1, 0) == Complex(0.0, 0.0));
  CHECK(out.bin(1)(0, 1) == Complex(0.5, 0.0));
  CHECK(out.bin(1)(1, 1) == Complex(0.5, 0.0));
  CHECK(out.bin(1).col(2).norm() == 0.0);
  CHECK_FALSE(out.frame_valid(1, 2));
  CHECK(out.frame_valid(1, 0));

  // p = 2: divide by the squared Euclidean norm.
  const Spectrogram two =
      NormalizeObservations(MakeSpec({Eigen::MatrixXcd::Zero(2, 3), b}), 2.0);
  CHECK(std::abs(two.bin(1)(0, 1) - Complex(0.25, 0.0)) < 1e-15);

  for (double p : {0.0, -1.0})
    CHECK(ThrowsKind([&] { NormalizeObservations(MakeSpec({b}), p); },
                     ErrorKind::kParameter));
}

TEST_CASE("Psi closed forms") {
  const AlphaParam alpha(1.3);
  const Eigen::MatrixXd eye =
      BuildPsi(NormalizeSvs(SingleSv(Eigen::MatrixXcd::Identity(3, 3), 1.0)),
               alpha);
  CHECK((eye - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-15);

  const Eigen::MatrixXcd a = 2.0 * Eigen::MatrixXcd::Identity(2, 2);
  const Eigen::MatrixXd d = BuildPsi(NormalizeSvs(SingleSv(a, 1.0)), alpha);
  CHECK(d(0, 0) == doctest::Approx(std::pow(0.25, 1.3)).epsilon(1e-14));
}

TEST_CASE("Psi is symmetric for unit-norm steering vectors") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXcd a = shamans::testing::RandomComplex(9, 4, rng);
    a.rowwise().normalize();
    const SteeringVectorSet svs({a, a.conjugate()}, DoaGrid::Uniform(9),
                                {100.0, 200.0}, SvSource::kAlgebraic);
    const Eigen::MatrixXd psi = BuildPsi(NormalizeSvs(svs), AlphaParam(1.7));
    CHECK(psi.rows() == 18);
    CHECK(psi.minCoeff() >= 0.0);
    for (Index f = 0; f < 2; ++f) {
      const Eigen::MatrixXd block = psi.middleRows(f * 9, 9);
      CHECK((block - block.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("Update rule: identity Psi reaches the target in one step") {
  const Eigen::VectorXd y = (Eigen::VectorXd(4) << 0.0, 1.5, 3.0, 0.25).finished();
  MultiplicativeUpdater<double> mu(Eigen::MatrixXd::Identity(4, 4), y, 1.0, 0.0);
  mu.Step();
  CHECK((mu.upsilon() - y).norm() < 1e-15);
}

TEST_CASE("Update rule: dominant sparsity drives the measure down") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  Eigen::MatrixXd psi(6, 3);
  for (Index i = 0; i < psi.size(); ++i) psi(i) = u(rng);
  Eigen::VectorXd i_hat(6);
  for (Index i = 0; i < 6; ++i) i_hat(i) = u(rng);
  MultiplicativeUpdater<double> mu(psi, i_hat, 1.0, 1e6);
  mu.Step();
  CHECK(mu.upsilon().maxCoeff() < 1e-5);
  mu.Run(50);
  CHECK(mu.upsilon().maxCoeff() < 1e-5);

  // The settled mass keeps falling as the penalty grows.
  double prev = std::numeric_limits<double>::infinity();
  for (double lambda : {1e1, 1e3, 1e5, 1e7}) {
    MultiplicativeUpdater<double> run(psi, i_hat, 1.0, lambda);
    run.Run(200);
    CHECK(run.upsilon().sum() < prev);
    prev = run.upsilon().sum();
  }
}

TEST_CASE("Update rule recovers a sparse measure") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd psi(12, 4);
  for (Index i = 0; i < psi.size(); ++i) psi(i) = u(rng);
  const Eigen::VectorXd truth =
      (Eigen::VectorXd(4) << 0.0, 2.0, 0.0, 0.5).finished();
  MultiplicativeUpdater<double> mu(psi, psi * truth, 1.0, 1e-3);
  mu.Run(500);
  CHECK(mu.upsilon()(1) == doctest::Approx(2.0).epsilon(0.05));
  CHECK(mu.upsilon()(3) == doctest::Approx(0.5).epsilon(0.05));
  CHECK(mu.upsilon()(0) < 0.05);
  CHECK(mu.upsilon()(2) < 0.05);
}

TEST_CASE("Update rule fixed point") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  Eigen::MatrixXd psi(16, 8);
  for (Index i = 0; i < psi.size(); ++i) psi(i) = u(rng);
  Eigen::VectorXd truth(8);
  for (Index i = 0; i < 8; ++i) truth(i) = u(rng);
  for (double beta : {0.0, 1.0, 2.0}) {
    MultiplicativeUpdater<double> mu(psi, psi * truth, beta, 0.0);
    mu.set_upsilon(truth);
    mu.Step();
    CHECK((mu.upsilon() - truth).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("Update rule: objective never increases and iterates stay nonnegative") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::MatrixXd psi(16, 8);
    for (Index i = 0; i < psi.size(); ++i) psi(i) = u(rng);
    Eigen::VectorXd i_hat(16);
    for (Index i = 0; i < 16; ++i) i_hat(i) = 2.0 * u(rng);
    MultiplicativeUpdater<double> mu(psi, i_hat, 1.0, 1e-3);
    double prev = mu.Objective();
    bool monotone = true, nonnegative = true;
    for (int k = 0; k < 500; ++k) {
      mu.Step();
      const double obj = mu.Objective();
      monotone &= obj <= prev + 1e-9 * std::abs(prev);
      nonnegative &= mu.upsilon().minCoeff() >= 0.0;
      prev = obj;
    }
    CHECK(monotone);
    CHECK(nonnegative);
  }
}

TEST_CASE("Beta divergence reference values") {
  const Eigen::VectorXd x = (Eigen::VectorXd(2) << 1.0, 2.0).finished();
  const Eigen::VectorXd y = (Eigen::VectorXd(2) << 2.0, 2.0).finished();
  CHECK(BetaDivergence<double>(x, y, 1.0) ==
        doctest::Approx(std::log(0.5) + 1.0));
  CHECK(BetaDivergence<double>(x, y, 2.0) == doctest::Approx(0.5));
  CHECK(BetaDivergence<double>(x, y, 0.0) ==
        doctest::Approx(0.5 - std::log(0.5) - 1.0));
  CHECK(BetaDivergence<double>(x, x, 1.0) == 0.0);
}

TEST_CASE("Solver configuration checks") {
  SolverConfig c;
  CHECK_NOTHROW(c.Validate());
  c.iterations = 0;
  CHECK(ThrowsKind([&] { c.Validate(); }, ErrorKind::kParameter));
  c = SolverConfig{};
  c.sparsity_lambda = -1.0;
  CHECK(ThrowsKind([&] { c.Validate(); }, ErrorKind::kParameter));
  c = SolverConfig{};
  c.p_norm = 0.0;
  CHECK(ThrowsKind([&] { c.Validate(); }, ErrorKind::kParameter));
}

TEST_CASE("Localization of a single noiseless source") {
  const DeskScene d = MakeDeskScene({17}, std::numeric_limits<double>::infinity(), 1);
  const ShamansResult r = ShamansLocalize(d.scene.spectrogram, d.svs, {});
  CHECK(Argmax(r.measure.upsilon) == 17);
  CHECK(r.measure.upsilon.minCoeff() >= 0.0);
  CHECK(r.measure.upsilon.allFinite());
  CHECK(r.freqs_used == 128);
  CHECK(r.alpha < 2.0);
}

TEST_CASE("Pure noise gives a flat measure") {
  const DeskScene d = MakeDeskScene({}, 0.0, 2);
  const Eigen::VectorXd u = ShamansLocalize(d.scene.spectrogram, d.svs, {}).measure.upsilon;
  CHECK(u.maxCoeff() / u.mean() < 3.0);
}

TEST_CASE("Two separated sources are both found") {
  const DeskScene d = MakeDeskScene({10, 32}, 30.0, 3);
  const Eigen::VectorXd u = ShamansLocalize(d.scene.spectrogram, d.svs, {}).measure.upsilon;
  const Index l = u.size();
  Index first = Argmax(u);
  Eigen::VectorXd rest = u;
  for (Index k = -1; k <= 1; ++k) rest((first + k + l) % l) = 0.0;
  const Index second = Argmax(rest);
  const Index hi = std::max(first, second), lo = std::min(first, second);
  CHECK(CircularCells(lo, 10, l) <= 1);
  CHECK(CircularCells(hi, 32, l) <= 1);
}

TEST_CASE("Observation normalization leaves the argmax in place") {
  const DeskScene d = MakeDeskScene({41}, 40.0, 4);
  const Spectrogram& x = d.scene.spectrogram;
  const SolverConfig cfg;
  const AlphaParam alpha = EstimateAlpha(x);
  const SpatialMeasure with = MultiplicativeUpdate(
      BuildSketch(NormalizeObservations(x, 1.0), d.svs, alpha, 0.0), cfg,
      d.svs.grid());
  const SpatialMeasure without = MultiplicativeUpdate(
      BuildSketch(x, d.svs, alpha, 0.0), cfg, d.svs.grid());
  CHECK(Argmax(with.upsilon) == 41);
  CHECK(Argmax(without.upsilon) == Argmax(with.upsilon));
}

TEST_CASE("Global observation scaling leaves the argmax in place") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const DeskScene d = MakeDeskScene({static_cast<int>(seed * 3 % 60)}, 30.0, seed);
    const Index ref = Argmax(ShamansLocalize(d.scene.spectrogram, d.svs, {}).measure.upsilon);
    for (double c : {0.1, 10.0}) {
      Spectrogram scaled = d.scene.spectrogram;
      for (Index f = 0; f < scaled.num_freqs(); ++f) scaled.bin(f) *= c;
      CHECK(Argmax(ShamansLocalize(scaled, d.svs, {}).measure.upsilon) == ref);
    }
  }
}

TEST_CASE("Doubling the noise level leaves the argmax in place") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const int index = static_cast<int>(7 + 11 * seed);
    const DeskScene a = MakeDeskScene({index}, 26.0, seed);
    const DeskScene b = MakeDeskScene({index}, 26.0 - 20.0 * std::log10(2.0), seed);
    CHECK(b.scene.truth.noise_scale ==
          doctest::Approx(2.0 * a.scene.truth.noise_scale).epsilon(1e-12));
    CHECK(Argmax(ShamansLocalize(a.scene.spectrogram, a.svs, {}).measure.upsilon) ==
          Argmax(ShamansLocalize(b.scene.spectrogram, b.svs, {}).measure.upsilon));
  }
}

TEST_CASE("The norm exponent must stay below alpha") {
  const DeskScene d = MakeDeskScene({5}, 20.0, 6);
  SolverConfig cfg;
  cfg.alpha_override = 1.2;
  cfg.p_norm = 1.5;
  CHECK(ThrowsKind([&] { ShamansLocalize(d.scene.spectrogram, d.svs, cfg); },
                   ErrorKind::kParameter));
}

TEST_CASE("Localization frequencies skip DC and must exist in the SVs") {
  const DeskScene d = MakeDeskScene({5}, 20.0, 7);
  const auto freqs = LocalizationFreqs(d.scene.spectrogram);
  CHECK(freqs.size() == 128);
  CHECK(freqs.front() == 62.5);
  const SteeringVectorSet partial = d.svs.SelectFreqs({0, 1});
  CHECK(ThrowsKind([&] { ShamansLocalize(d.scene.spectrogram, partial, {}); },
                   ErrorKind::kShape));
}
