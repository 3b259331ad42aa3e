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

// Data-generating processes for the one- and multi-dimensional simulation
// scenarios, and a replication driver that fits each draw and tallies variable
// selection and fitting MSE.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mfrkhs/dataset.hpp"
#include "mfrkhs/kernels.hpp"
#include "mfrkhs/model.hpp"
#include "mfrkhs/solver.hpp"

namespace mfrkhs::sim {

enum class Scenario { one_dim, multi_dim };

std::string to_string(Scenario s);
Scenario scenario_from_string(const std::string& s);

/// "135" -> {1, 3, 5}. Digits must be distinct and within 1..5.
std::vector<int> parse_zero_set(const std::string& shorthand);
std::string zero_set_shorthand(const std::vector<int>& zero_set);

/// Grid resolution per axis. Zero selects the scenario default.
struct GridResolution {
  int response_points = 0;  // one-dim: 201, multi-dim: 51 per axis
  int points_1d = 101;
  int points_2d = 51;
  int points_3d = 21;
};

struct ScenarioConfig {
  Scenario scenario = Scenario::one_dim;
  int n = 50;
  KernelFamily kernel = KernelFamily::gaussian;
  double bandwidth = 1.0;
  double sigma_noise = 0.01;
  std::vector<int> zero_set{5};
  std::uint64_t seed = 0;
  GridResolution grids;
  bool reindexed_u = false;  // multi-dim only: nonzero u_j for every j

  void validate() const;
  int response_points() const;
};

inline constexpr int kCovariateCount = 5;

/// A generated dataset with the parameters that produced it.
struct SimulatedData {
  Dataset<double> data;
  Vector<double> theta_true;
  SampleSet<double> u_true;
  std::vector<int> sine_counts;  // operator used for both generation and fitting
  std::shared_ptr<const FiniteRankOperator<double>> op;

  std::vector<KernelSpec<double>> kernel_specs(KernelFamily family, double bandwidth) const;
};

/// SplitMix64 finalizer applied to (master, stream); used for per-replication seeds.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

SimulatedData gen_one_dim(const ScenarioConfig& cfg);
SimulatedData gen_multi_dim(const ScenarioConfig& cfg);
SimulatedData generate(const ScenarioConfig& cfg);

/// Covariate and basis formulas, exposed for tests. `i` and `j` are 1-based.
double one_dim_covariate(int l, int i, double t);
double multi_dim_covariate(int l, int i, std::span<const double> coords);
int multi_dim_covariate_dim(int l);
std::pair<int, int> multi_dim_u_frequencies(int j, bool reindexed);

struct ReplicationRecord {
  std::uint64_t seed = 0;
  Vector<double> theta_true;
  Vector<double> theta_hat;
  double mse = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective_trace;
  std::optional<std::string> failure;
};

struct ReplicationSummary {
  std::vector<int> selection_counts;  // per covariate, theta_hat above threshold
  double mean_mse = 0.0;
  int reps = 0;      // successful replications
  int failures = 0;
  std::vector<ReplicationRecord> records;
};

/// Replication r regenerates data with seed derive_seed(cfg.seed, r) and fits it with
/// the generating operator. Failures are recorded and excluded from the aggregates.
ReplicationSummary run_replications(const ScenarioConfig& cfg, int reps, const FitConfig<double>& fit_cfg,
                                    int threads = 1);

}  // namespace mfrkhs::sim
