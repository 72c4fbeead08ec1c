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

#ifndef SHAMANS_STABLE_HPP_
#define SHAMANS_STABLE_HPP_

#include <cmath>
#include <vector>

#include "shamans/common.hpp"
#include "shamans/signal.hpp"
#include "shamans/steering.hpp"

namespace shamans {

// Characteristic exponent of an alpha-stable law, 0 < alpha <= 2.
class AlphaParam {
 public:
  explicit AlphaParam(double alpha) : alpha_(alpha) {
    Require(alpha > 0.0 && alpha <= 2.0 && std::isfinite(alpha),
            ErrorKind::kParameter, "alpha must lie in (0, 2]");
  }
  double value() const { return alpha_; }
  bool is_gaussian() const { return alpha_ == 2.0; }

 private:
  double alpha_;
};

// Stacked Levy-exponent estimates and the matching mixing matrix, one block
// of L rows per frequency, directions fastest.
struct LevySketch {
  Eigen::VectorXd i_hat;  // [F' L]
  Eigen::MatrixXd psi;    // [F' L x L]
  AlphaParam alpha{2.0};
  Index num_freqs = 0;
  double sv_gain = 1.0;  // global gain applied to the SVs before use
};

struct SpatialMeasure {
  Eigen::VectorXd upsilon;  // [L], nonnegative
  DoaGrid grid;
};

// Elliptic isotropic noise n ~ E_alpha(eps I). Only the simulator uses it;
// the solver never estimates eps.
struct NoiseModel {
  double epsilon = 0.0;
  double alpha = 2.0;
  double c_alpha() const { return std::pow(epsilon / 2.0, alpha / 2.0); }
};

struct SolverConfig {
  double beta = 1.0;
  double sparsity_lambda = 1e-3;
  int iterations = 500;
  double p_norm = 1.0;
  // When positive, the steering vectors are rescaled by one global gain so
  // their mean l1 norm equals this value before normalization. The
  // estimator's characteristic function is evaluated at an argument
  // proportional to the SV scale; 0 keeps the SVs as given.
  double sv_reference_l1 = 0.0;
  // When positive, used instead of estimating alpha from the mixture.
  double alpha_override = 0.0;

  void Validate() const;
};

// Characteristic-function regression: for real projections y of the
// observations onto fixed random complex directions, fit
// log(-log|phi(theta)|) against log(theta); the slope is alpha. Projections
// are rescaled by their median magnitude first. Result clamped to
// [0.4, 2.0]. The DC bin is ignored.
AlphaParam EstimateAlpha(const Spectrogram& spec);

// Isotropic complex symmetric alpha-stable draws whose Levy exponent is
// I(theta) = scale * |theta|^alpha, i.e. E exp(i Re(conj(theta) x)) =
// exp(-scale |theta|^alpha). Built as sqrt(W) G with G circular Gaussian and
// W a positive (alpha/2)-stable variable from the Chambers-Mallows-Stuck
// formula for totally skewed laws.
std::vector<Complex> SampleSas(AlphaParam alpha, double scale, Index count,
                               std::uint64_t seed);

// x / ||x||_p^p for every time-frequency vector; all-zero vectors stay zero
// and are marked invalid in the frame mask.
Spectrogram NormalizeObservations(const Spectrogram& spec, double p);

// Spectrogram bin of each requested frequency; throws kShape when a
// frequency has no bin.
std::vector<Index> PairBins(const Spectrogram& spec,
                            const std::vector<double>& freqs_hz);

// -2 ln |(1/T) sum_t exp(i Re(a~^H x_t) / 2^(1/alpha))| for every direction
// and SV frequency. Invalid and all-zero frames are skipped; a bin with no
// usable frame yields 0.
Eigen::VectorXd LevyEstimator(const Spectrogram& spec,
                              const NormalizedSVSet& svs, AlphaParam alpha);

// |A A^H|^alpha for one frequency block whose rows are normalized SVs.
template <typename Scalar>
MatrixX<Scalar> PsiBlock(
    const Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>&
        normalized,
    Scalar alpha) {
  const auto inner = (normalized.conjugate() * normalized.transpose()).eval();
  return inner.cwiseAbs().array().pow(alpha).matrix();
}

Eigen::MatrixXd BuildPsi(const NormalizedSVSet& svs, AlphaParam alpha);

// Pointwise beta-divergence sum_i d_beta(x_i | y_i).
template <typename Scalar>
Scalar BetaDivergence(const VectorX<Scalar>& x, const VectorX<Scalar>& y,
                      Scalar beta) {
  using std::log;
  using std::pow;
  Scalar total = Scalar(0);
  for (Index i = 0; i < x.size(); ++i) {
    const Scalar a = x(i), b = y(i);
    if (beta == Scalar(1)) {
      total += (a > Scalar(0) ? a * log(a / b) : Scalar(0)) - a + b;
    } else if (beta == Scalar(0)) {
      total += a / b - log(a / b) - Scalar(1);
    } else {
      total += (pow(a, beta) + (beta - Scalar(1)) * pow(b, beta) -
                beta * a * pow(b, beta - Scalar(1))) /
               (beta * (beta - Scalar(1)));
    }
  }
  return total;
}

// Sparse multiplicative updates for I ~ Psi Y under the beta-divergence with
// an l1 penalty:
//   Y <- Y * Psi^T((Psi Y)^(beta-2) * I) / (Psi^T (Psi Y)^(beta-1) + lambda)
template <typename Scalar>
class MultiplicativeUpdater {
 public:
  // Floor applied to Psi Y before it is raised to a power.
  static constexpr double kFloor = 1e-12;

  MultiplicativeUpdater(const MatrixX<Scalar>& psi, const VectorX<Scalar>& i_hat,
                        Scalar beta, Scalar lambda)
      : psi_(psi),
        i_hat_(i_hat),
        beta_(beta),
        lambda_(lambda),
        upsilon_(VectorX<Scalar>::Ones(psi.cols())) {
    Require(psi.rows() == i_hat.size(), ErrorKind::kShape,
            "Psi rows must match the sketch length");
    Require(lambda >= Scalar(0), ErrorKind::kParameter,
            "sparsity lambda must be nonnegative");
  }

  void set_upsilon(const VectorX<Scalar>& upsilon) {
    Require(upsilon.size() == psi_.cols(), ErrorKind::kShape,
            "initial measure has the wrong length");
    upsilon_ = upsilon;
  }
  const VectorX<Scalar>& upsilon() const { return upsilon_; }

  void Step() {
    const VectorX<Scalar> model =
        (psi_ * upsilon_).cwiseMax(Scalar(kFloor));
    VectorX<Scalar> num_weights, den_weights;
    if (beta_ == Scalar(1)) {
      num_weights = i_hat_.cwiseQuotient(model);
      den_weights = VectorX<Scalar>::Ones(model.size());
    } else {
      num_weights =
          model.array().pow(beta_ - Scalar(2)).matrix().cwiseProduct(i_hat_);
      den_weights = model.array().pow(beta_ - Scalar(1)).matrix();
    }
    const VectorX<Scalar> numerator = psi_.transpose() * num_weights;
    const VectorX<Scalar> denominator =
        (psi_.transpose() * den_weights).array() + lambda_;
    for (Index l = 0; l < upsilon_.size(); ++l) {
      upsilon_(l) = denominator(l) > Scalar(0)
                        ? upsilon_(l) * numerator(l) / denominator(l)
                        : Scalar(0);
    }
  }

  void Run(int iterations) {
    for (int k = 0; k < iterations; ++k) Step();
  }

  // d_beta(I | Psi Y) + lambda ||Y||_1.
  Scalar Objective() const {
    const VectorX<Scalar> model =
        (psi_ * upsilon_).cwiseMax(Scalar(kFloor));
    return BetaDivergence<Scalar>(i_hat_, model, beta_) +
           lambda_ * upsilon_.sum();
  }

 private:
  MatrixX<Scalar> psi_;
  VectorX<Scalar> i_hat_;
  Scalar beta_;
  Scalar lambda_;
  VectorX<Scalar> upsilon_;
};

// Runs config.iterations updates from the all-ones measure.
SpatialMeasure MultiplicativeUpdate(const LevySketch& sketch,
                                    const SolverConfig& config,
                                    const DoaGrid& grid);

struct ShamansResult {
  SpatialMeasure measure;
  double alpha = 2.0;
  Index freqs_used = 0;
  Index frames = 0;
  double sv_gain = 1.0;
};

// Full pipeline: alpha estimation, observation normalization, SV
// normalization, Levy sketch, Psi, multiplicative updates. Uses every
// non-DC bin of the spectrogram; each must have a matching SV frequency.
ShamansResult ShamansLocalize(const Spectrogram& spec,
                              const SteeringVectorSet& svs,
                              const SolverConfig& config);

// Sketch for the non-DC bins of spec against the matching SVs, with the
// same preprocessing as ShamansLocalize.
LevySketch BuildSketch(const Spectrogram& normalized_spec,
                       const SteeringVectorSet& svs, AlphaParam alpha,
                       double sv_reference_l1);

// The SV frequencies used for a spectrogram: every bin except DC.
std::vector<double> LocalizationFreqs(const Spectrogram& spec);

}  // namespace shamans

#endif  // SHAMANS_STABLE_HPP_
