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

#include "shamans/sh.hpp"

namespace shamans {

Eigen::MatrixXd ShBasisMatrix(const std::vector<Eigen::Vector3d>& directions,
                              int max_degree) {
  Require(max_degree >= 0, ErrorKind::kParameter,
          "max_degree must be nonnegative");
  Eigen::MatrixXd basis(static_cast<Index>(directions.size()),
                        ShCount(max_degree));
  for (std::size_t n = 0; n < directions.size(); ++n)
    basis.row(static_cast<Index>(n)) =
        ShBasis<double>(directions[n], max_degree).transpose();
  return basis;
}

}  // namespace shamans
