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

#ifndef SHAMANS_SH_HPP_
#define SHAMANS_SH_HPP_

#include <cmath>
#include <vector>

#include "shamans/common.hpp"

namespace shamans {

// Number of real spherical harmonics up to and including max_degree.
constexpr Index ShCount(int max_degree) {
  return static_cast<Index>(max_degree + 1) * (max_degree + 1);
}

// Flat position of harmonic (degree, order), order in [-degree, degree].
constexpr Index ShIndex(int degree, int order) {
  return static_cast<Index>(degree) * degree + degree + order;
}

// Real orthonormal spherical harmonics at a unit direction, ordered by
// degree and then order -degree..degree. Orders > 0 use cos(order * phi),
// orders < 0 use sin(|order| * phi); no Condon-Shortley phase.
//
// The associated Legendre functions are carried divided by sin^order(theta)
// and the azimuthal factor is formed as (x + iy)^order, which keeps the
// poles free of special cases.
template <typename Scalar>
VectorX<Scalar> ShBasis(const Eigen::Matrix<Scalar, 3, 1>& direction,
                        int max_degree) {
  using std::sqrt;
  const Scalar x = direction(0), y = direction(1), z = direction(2);
  VectorX<Scalar> out(ShCount(max_degree));
  const Scalar four_pi = Scalar(4 * kPi);

  // (x + iy)^order split into real and imaginary parts.
  Scalar re_pow = Scalar(1), im_pow = Scalar(0);
  // (2 order - 1)!! for the diagonal seed of the recurrence.
  Scalar diag = Scalar(1);
  for (int order = 0; order <= max_degree; ++order) {
    if (order > 0) {
      const Scalar re = re_pow * x - im_pow * y;
      im_pow = re_pow * y + im_pow * x;
      re_pow = re;
      diag *= Scalar(2 * order - 1);
    }
    Scalar prev2 = Scalar(0);
    Scalar prev = diag;
    // (degree - order)! / (degree + order)!, updated as degree grows.
    Scalar fact_ratio = Scalar(1);
    for (int k = 1; k <= 2 * order; ++k) fact_ratio /= Scalar(k);
    for (int degree = order; degree <= max_degree; ++degree) {
      Scalar legendre;
      if (degree == order) {
        legendre = diag;
      } else {
        legendre = (Scalar(2 * degree - 1) * z * prev -
                    Scalar(degree + order - 1) * prev2) /
                   Scalar(degree - order);
        prev2 = prev;
        prev = legendre;
        fact_ratio *= Scalar(degree - order) / Scalar(degree + order);
      }
      const Scalar norm = sqrt(Scalar(2 * degree + 1) / four_pi * fact_ratio);
      if (order == 0) {
        out(ShIndex(degree, 0)) = norm * legendre;
      } else {
        const Scalar s = sqrt(Scalar(2)) * norm * legendre;
        out(ShIndex(degree, order)) = s * re_pow;
        out(ShIndex(degree, -order)) = s * im_pow;
      }
    }
  }
  return out;
}

// Rows are ShBasis() evaluated at each direction.
Eigen::MatrixXd ShBasisMatrix(const std::vector<Eigen::Vector3d>& directions,
                              int max_degree);

}  // namespace shamans

#endif  // SHAMANS_SH_HPP_
