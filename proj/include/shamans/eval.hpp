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

#ifndef SHAMANS_EVAL_HPP_
#define SHAMANS_EVAL_HPP_

#include <vector>

#include "shamans/common.hpp"
#include "shamans/steering.hpp"

namespace shamans {

// Distance on the circle, in [0, 180].
double AngularError(double truth_deg, double estimate_deg);

// Min-max normalization to [0, 1]; a constant vector maps to all ones.
Eigen::VectorXd MinMaxNormalize(const Eigen::VectorXd& values);

struct Peak {
  Index index = 0;
  double value = 0.0;
  bool operator==(const Peak&) const = default;
};

// Circular local maxima (value >= both neighbours and > the smaller one)
// with value >= threshold, chosen greedily by descending value, ties to the
// lower index, skipping candidates closer than min_sep_cells to a chosen
// peak, at most max_peaks of them. Sorted by descending value.
std::vector<Peak> PickPeaks(const Eigen::VectorXd& spectrum, double threshold,
                            int min_sep_cells, int max_peaks);

struct Assignment {
  std::vector<int> row_to_col;  // -1 when a row is left unassigned
  double total_cost = 0.0;
};

// Minimum-cost one-to-one assignment. With more rows than columns the
// matrix is padded with columns of large cost and those rows stay
// unassigned.
Assignment HungarianAssign(const Eigen::MatrixXd& cost);

// Fraction of errors strictly below threshold_deg.
double AccuracyAt(const std::vector<double>& errors_deg, double threshold_deg);

// Per-truth angular errors after optimal matching to the estimates; truth
// sources left without an estimate get 180 degrees.
std::vector<double> MatchedErrors(const std::vector<double>& truth_deg,
                                  const std::vector<double>& estimate_deg);

// Source-count classification AUC. For each threshold a scene is labelled
// positive when PickPeaks(spectrum, threshold, min_sep_cells, L) returns
// exactly target_n peaks; the ROC points plus (0,0) and (1,1) are sorted by
// false-positive rate and integrated with the trapezoid rule. Spectra are
// expected to be normalized to [0, 1].
double AucSourceCount(const std::vector<Eigen::VectorXd>& spectra,
                      const std::vector<int>& true_counts, int target_n,
                      const std::vector<double>& thresholds,
                      int min_sep_cells = 2);

// Thresholds 0, step, 2 step, ..., up to and including 1.
std::vector<double> ThresholdLadder(double step = 0.01);

}  // namespace shamans

#endif  // SHAMANS_EVAL_HPP_
