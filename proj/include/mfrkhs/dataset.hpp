// Copyright 2026 The mfrkhs Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>
#include <vector>

#include "mfrkhs/errors.hpp"
#include "mfrkhs/funcspace.hpp"

namespace mfrkhs {

/// Paired functional samples (y_i, x_i^(1..p)), i = 1..n.
template <typename Scalar>
struct Dataset {
  SampleSet<Scalar> responses;
  std::vector<SampleSet<Scalar>> covariates;
  std::vector<std::string> names;  // one per covariate, may be empty

  Eigen::Index n() const { return responses.size(); }
  std::size_t p() const { return covariates.size(); }

  const std::string& name(std::size_t l) const { return names.at(l); }

  void validate() const {
    if (n() < 1) throw InvalidArgumentError("dataset has no samples");
    if (covariates.empty()) throw InvalidArgumentError("dataset has no covariates");
    if (!names.empty() && names.size() != covariates.size())
      throw InvalidArgumentError("dataset has " + std::to_string(names.size()) + " names for " +
                                 std::to_string(covariates.size()) + " covariates");
    for (std::size_t l = 0; l < covariates.size(); ++l)
      if (covariates[l].size() != n())
        throw InvalidArgumentError("covariate " + std::to_string(l) + " has " + std::to_string(covariates[l].size()) +
                                   " samples, responses have " + std::to_string(n()));
  }
};

/// Default covariate names x1..xp.
inline std::vector<std::string> default_names(std::size_t p) {
  std::vector<std::string> out;
  for (std::size_t l = 0; l < p; ++l) out.push_back("x" + std::to_string(l + 1));
  return out;
}

}  // namespace mfrkhs
