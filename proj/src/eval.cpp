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

#include "shamans/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace shamans {

double AngularError(double truth_deg, double estimate_deg) {
  const double d = std::fmod(std::abs(truth_deg - estimate_deg), 360.0);
  return std::min(d, 360.0 - d);
}

Eigen::VectorXd MinMaxNormalize(const Eigen::VectorXd& values) {
  if (values.size() == 0) return values;
  const double lo = values.minCoeff();
  const double hi = values.maxCoeff();
  if (!(hi > lo)) return Eigen::VectorXd::Ones(values.size());
  return (values.array() - lo) / (hi - lo);
}

std::vector<Peak> PickPeaks(const Eigen::VectorXd& spectrum, double threshold,
                            int min_sep_cells, int max_peaks) {
  const Index n = spectrum.size();
  std::vector<Peak> candidates;
  for (Index i = 0; i < n && n >= 2; ++i) {
    const double v = spectrum(i);
    const double left = spectrum((i + n - 1) % n);
    const double right = spectrum((i + 1) % n);
    if (v >= left && v >= right && v > std::min(left, right) && v >= threshold)
      candidates.push_back({i, v});
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Peak& a, const Peak& b) { return a.value > b.value; });
  std::vector<Peak> chosen;
  for (const Peak& c : candidates) {
    if (static_cast<int>(chosen.size()) >= max_peaks) break;
    bool far = true;
    for (const Peak& p : chosen) {
      const Index d = std::abs(c.index - p.index);
      if (std::min(d, n - d) < min_sep_cells) far = false;
    }
    if (far) chosen.push_back(c);
  }
  return chosen;
}

Assignment HungarianAssign(const Eigen::MatrixXd& cost) {
  Assignment out;
  const Index rows = cost.rows();
  const Index cols = cost.cols();
  if (rows == 0 || cols == 0) {
    out.row_to_col.assign(static_cast<std::size_t>(rows), -1);
    return out;
  }
  Require(cost.allFinite(), ErrorKind::kParameter,
          "assignment costs must be finite");
  Eigen::MatrixXd c = cost;
  if (rows > cols) {
    const double big =
        1.0 + rows * (cost.cwiseAbs().maxCoeff() + 1.0);
    c.conservativeResize(rows, rows);
    c.rightCols(rows - cols).setConstant(big);
  }
  const Index n = c.rows();
  const Index m = c.cols();
  // Shortest augmenting paths with row/column potentials; 1-based helpers.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<Index> match(m + 1, 0), way(m + 1, 0);
  for (Index i = 1; i <= n; ++i) {
    match[0] = i;
    Index j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<bool> used(m + 1, false);
    do {
      used[j0] = true;
      const Index i0 = match[j0];
      double delta = inf;
      Index j1 = 0;
      for (Index j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = c(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (Index j = 0; j <= m; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const Index j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  out.row_to_col.assign(static_cast<std::size_t>(rows), -1);
  for (Index j = 1; j <= m; ++j) {
    const Index i = match[j] - 1;
    if (i >= 0 && j - 1 < cols) {
      out.row_to_col[i] = static_cast<int>(j - 1);
      out.total_cost += cost(i, j - 1);
    }
  }
  return out;
}

double AccuracyAt(const std::vector<double>& errors_deg, double threshold_deg) {
  Require(threshold_deg > 0.0, ErrorKind::kParameter,
          "accuracy threshold must be positive");
  Require(!errors_deg.empty(), ErrorKind::kParameter,
          "accuracy of an empty error list is undefined");
  const auto hits = std::count_if(errors_deg.begin(), errors_deg.end(),
                                  [&](double e) { return e < threshold_deg; });
  return static_cast<double>(hits) / static_cast<double>(errors_deg.size());
}

std::vector<double> MatchedErrors(const std::vector<double>& truth_deg,
                                  const std::vector<double>& estimate_deg) {
  const auto n = static_cast<Index>(truth_deg.size());
  const auto k = static_cast<Index>(estimate_deg.size());
  Eigen::MatrixXd cost(n, k);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < k; ++j)
      cost(i, j) = AngularError(truth_deg[i], estimate_deg[j]);
  const Assignment a = HungarianAssign(cost);
  std::vector<double> errors(truth_deg.size(), 180.0);
  for (Index i = 0; i < n; ++i)
    if (a.row_to_col[i] >= 0) errors[i] = cost(i, a.row_to_col[i]);
  return errors;
}

double AucSourceCount(const std::vector<Eigen::VectorXd>& spectra,
                      const std::vector<int>& true_counts, int target_n,
                      const std::vector<double>& thresholds,
                      int min_sep_cells) {
  Require(spectra.size() == true_counts.size(), ErrorKind::kShape,
          "one label per spectrum required");
  Require(spectra.size() >= 2, ErrorKind::kParameter,
          "AUC needs at least two scenes");
  const auto positives = std::count(true_counts.begin(), true_counts.end(),
                                    target_n);
  const auto negatives = static_cast<std::ptrdiff_t>(true_counts.size()) -
                         positives;
  Require(positives > 0 && negatives > 0, ErrorKind::kNumerical,
          "AUC is undefined when all scenes share one label");

  std::vector<std::pair<double, double>> roc = {{0.0, 0.0}, {1.0, 1.0}};
  for (double threshold : thresholds) {
    std::ptrdiff_t tp = 0, fp = 0;
    for (std::size_t s = 0; s < spectra.size(); ++s) {
      const auto peaks =
          PickPeaks(spectra[s], threshold, min_sep_cells,
                    static_cast<int>(spectra[s].size()));
      if (static_cast<int>(peaks.size()) != target_n) continue;
      if (true_counts[s] == target_n) ++tp; else ++fp;
    }
    roc.emplace_back(static_cast<double>(fp) / negatives,
                     static_cast<double>(tp) / positives);
  }
  std::sort(roc.begin(), roc.end());
  double area = 0.0;
  for (std::size_t i = 1; i < roc.size(); ++i)
    area += (roc[i].first - roc[i - 1].first) *
            (roc[i].second + roc[i - 1].second) / 2.0;
  return area;
}

std::vector<double> ThresholdLadder(double step) {
  Require(step > 0.0 && step <= 1.0, ErrorKind::kParameter,
          "threshold step must lie in (0, 1]");
  std::vector<double> out;
  const auto n = static_cast<int>(std::round(1.0 / step));
  for (int i = 0; i <= n; ++i) out.push_back(std::min(1.0, i * step));
  return out;
}

}  // namespace shamans
