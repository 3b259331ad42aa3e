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

#include "mfrkhs/simgen.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <thread>

namespace mfrkhs::sim {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

GridPtr<double> covariate_grid(int dim, const GridResolution& res) {
  const int points = dim == 1 ? res.points_1d : dim == 2 ? res.points_2d : res.points_3d;
  return unit_cube_grid<double>(static_cast<std::size_t>(dim), points);
}

template <typename Fn>
SampleSet<double> tabulate_set(const GridPtr<double>& grid, int count, Fn&& fn) {
  Matrix<double> values(count, grid->node_count());
  for (int i = 1; i <= count; ++i)
    values.row(i - 1) = tabulate<double>(grid, [&](std::span<const double> c) { return fn(i, c); }).values().transpose();
  return SampleSet<double>(grid, std::move(values));
}

SimulatedData finish(const ScenarioConfig& cfg, std::vector<SampleSet<double>> covariates, SampleSet<double> u_true,
                     std::vector<int> counts, std::shared_ptr<const FiniteRankOperator<double>> op) {
  std::mt19937_64 rng(derive_seed(cfg.seed, 0));
  std::uniform_real_distribution<double> uniform(1.0, 2.0);
  Vector<double> theta(kCovariateCount);
  for (int l = 0; l < kCovariateCount; ++l) {
    const double draw = uniform(rng);
    theta[l] = std::find(cfg.zero_set.begin(), cfg.zero_set.end(), l + 1) != cfg.zero_set.end() ? 0.0 : draw;
  }

  Matrix<double> g_theta = Matrix<double>::Zero(cfg.n, cfg.n);
  const KernelSpec<double> spec(cfg.kernel, cfg.bandwidth);
  for (int l = 0; l < kCovariateCount; ++l)
    if (theta[l] != 0.0) g_theta += theta[l] * gram(spec, covariates[static_cast<std::size_t>(l)]);

  Matrix<double> y = g_theta.transpose() * op->apply_rows(u_true.values());
  std::normal_distribution<double> normal(0.0, cfg.sigma_noise);
  for (Eigen::Index i = 0; i < y.rows(); ++i)
    for (Eigen::Index k = 0; k < y.cols(); ++k) y(i, k) += normal(rng);

  Dataset<double> data{SampleSet<double>(op->grid_ptr(), std::move(y)), std::move(covariates),
                       default_names(kCovariateCount)};
  return SimulatedData{std::move(data), std::move(theta), std::move(u_true), std::move(counts), std::move(op)};
}

}  // namespace

std::string to_string(Scenario s) { return s == Scenario::one_dim ? "one-dim" : "multi-dim"; }

Scenario scenario_from_string(const std::string& s) {
  if (s == "one-dim") return Scenario::one_dim;
  if (s == "multi-dim") return Scenario::multi_dim;
  throw InvalidArgumentError("unknown scenario '" + s + "' (expected one-dim or multi-dim)");
}

std::vector<int> parse_zero_set(const std::string& shorthand) {
  std::vector<int> out;
  for (char ch : shorthand) {
    if (ch < '1' || ch > '5') throw InvalidArgumentError("zero set '" + shorthand + "' must use digits 1-5");
    const int l = ch - '0';
    if (std::find(out.begin(), out.end(), l) != out.end())
      throw InvalidArgumentError("zero set '" + shorthand + "' repeats covariate " + std::to_string(l));
    out.push_back(l);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string zero_set_shorthand(const std::vector<int>& zero_set) {
  std::string s;
  for (int l : zero_set) s += std::to_string(l);
  return s;
}

void ScenarioConfig::validate() const {
  if (n < 1) throw InvalidArgumentError("scenario n must be at least 1");
  if (!(sigma_noise > 0.0)) throw InvalidArgumentError("scenario noise sigma must be positive");
  if (!(bandwidth > 0.0)) throw InvalidArgumentError("scenario kernel bandwidth must be positive");
  std::set<int> seen;
  for (int l : zero_set)
    if (l < 1 || l > kCovariateCount || !seen.insert(l).second)
      throw InvalidArgumentError("zero set must be a subset of {1..5}");
}

int ScenarioConfig::response_points() const {
  if (grids.response_points > 0) return grids.response_points;
  return scenario == Scenario::one_dim ? 201 : 51;
}

std::vector<KernelSpec<double>> SimulatedData::kernel_specs(KernelFamily family, double bandwidth) const {
  return std::vector<KernelSpec<double>>(data.p(), KernelSpec<double>(family, bandwidth));
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(splitmix64(master) ^ (stream * 0xD1B54A32D192ED03ULL + 0x632BE59BD9B4E019ULL));
}

double one_dim_covariate(int l, int i, double t) {
  const double di = i;
  switch (l) {
    case 1: return di * std::exp(t);
    case 2: return std::sin(di * t) + std::exp(t);
    case 3: return std::pow(t, di) + di * std::cos(t) / 3.0;
    case 4: return std::log(di + t * t);
    case 5: return std::sin(std::cos(di * t));
  }
  throw InvalidArgumentError("covariate index out of range");
}

int multi_dim_covariate_dim(int l) {
  static constexpr int dims[] = {1, 2, 3, 1, 2};
  if (l < 1 || l > kCovariateCount) throw InvalidArgumentError("covariate index out of range");
  return dims[l - 1];
}

double multi_dim_covariate(int l, int i, std::span<const double> c) {
  const double di = i;
  switch (l) {
    case 1: return di * c[0];
    case 2: return (di * std::sin(di * c[0]) + di * std::cos(c[1])) / 3.0;
    case 3: {
      const double m = std::abs(i - 25);
      return std::pow(c[0], m) * std::sin(di * c[2]) + c[1] * std::pow(m, c[2]);
    }
    case 4: return di * std::sin(di * c[0]) + c[0] * std::log(di);
    case 5: return c[0] * std::log(di) + di * std::cos(di * c[1]);
  }
  throw InvalidArgumentError("covariate index out of range");
}

std::pair<int, int> multi_dim_u_frequencies(int j, bool reindexed) {
  if (reindexed) return {(j - 1) / 7 + 1, (j - 1) % 7 + 1};
  const int h = j / 7;
  return {h, j - 7 * h};
}

SimulatedData gen_one_dim(const ScenarioConfig& cfg) {
  cfg.validate();
  if (cfg.scenario != Scenario::one_dim) throw InvalidArgumentError("gen_one_dim needs the one-dim scenario");
  const auto response_grid = unit_cube_grid<double>(1, cfg.response_points());
  const std::vector<int> counts{50};
  auto op = std::make_shared<const FiniteRankOperator<double>>(
      make_sine_projection<double>(std::span<const int>(counts), response_grid));

  const auto cov_grid = covariate_grid(1, cfg.grids);
  std::vector<SampleSet<double>> covariates;
  for (int l = 1; l <= kCovariateCount; ++l)
    covariates.push_back(
        tabulate_set(cov_grid, cfg.n, [l](int i, std::span<const double> c) { return one_dim_covariate(l, i, c[0]); }));

  auto u = tabulate_set(response_grid, cfg.n,
                        [](int j, std::span<const double> c) { return std::sin(kTwoPi * j * c[0]); });
  return finish(cfg, std::move(covariates), std::move(u), counts, std::move(op));
}

SimulatedData gen_multi_dim(const ScenarioConfig& cfg) {
  cfg.validate();
  if (cfg.scenario != Scenario::multi_dim) throw InvalidArgumentError("gen_multi_dim needs the multi-dim scenario");
  const auto response_grid = unit_cube_grid<double>(2, cfg.response_points());
  const std::vector<int> counts{8, 8};
  auto op = std::make_shared<const FiniteRankOperator<double>>(
      make_sine_projection<double>(std::span<const int>(counts), response_grid));

  std::vector<SampleSet<double>> covariates;
  for (int l = 1; l <= kCovariateCount; ++l) {
    const auto grid = covariate_grid(multi_dim_covariate_dim(l), cfg.grids);
    covariates.push_back(
        tabulate_set(grid, cfg.n, [l](int i, std::span<const double> c) { return multi_dim_covariate(l, i, c); }));
  }

  auto u = tabulate_set(response_grid, cfg.n, [&cfg](int j, std::span<const double> c) {
    const auto [h, l] = multi_dim_u_frequencies(j, cfg.reindexed_u);
    return std::sin(kTwoPi * h * c[0]) * std::sin(kTwoPi * l * c[1]);
  });
  return finish(cfg, std::move(covariates), std::move(u), counts, std::move(op));
}

SimulatedData generate(const ScenarioConfig& cfg) {
  return cfg.scenario == Scenario::one_dim ? gen_one_dim(cfg) : gen_multi_dim(cfg);
}

ReplicationSummary run_replications(const ScenarioConfig& cfg, int reps, const FitConfig<double>& fit_cfg,
                                    int threads) {
  if (reps < 1) throw InvalidArgumentError("reps must be at least 1");
  cfg.validate();
  fit_cfg.validate();

  std::vector<ReplicationRecord> records(static_cast<std::size_t>(reps));
  auto run_one = [&](int r) {
    ReplicationRecord& rec = records[static_cast<std::size_t>(r)];
    ScenarioConfig child = cfg;
    child.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(r) + 1);
    rec.seed = child.seed;
    try {
      const SimulatedData sim = generate(child);
      const auto model = fit(sim.data, sim.kernel_specs(cfg.kernel, cfg.bandwidth), sim.op, fit_cfg);
      rec.theta_true = sim.theta_true;
      rec.theta_hat = model.theta;
      rec.mse = evaluate_mse(model, sim.data);
      rec.iterations = model.report.iterations;
      rec.converged = model.report.converged;
      rec.objective_trace = model.report.objective_trace;
    } catch (const std::exception& e) {
      rec.failure = e.what();
    }
  };

  const int workers = std::clamp(threads, 1, reps);
  if (workers == 1) {
    for (int r = 0; r < reps; ++r) run_one(r);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (int r = next++; r < reps; r = next++) run_one(r);
      });
    for (auto& t : pool) t.join();
  }

  ReplicationSummary summary;
  summary.selection_counts.assign(kCovariateCount, 0);
  double mse_sum = 0.0;
  for (const auto& rec : records) {
    if (rec.failure) {
      ++summary.failures;
      continue;
    }
    ++summary.reps;
    mse_sum += rec.mse;
    for (Eigen::Index l = 0; l < rec.theta_hat.size(); ++l)
      if (rec.theta_hat[l] > kSelectionThreshold) ++summary.selection_counts[static_cast<std::size_t>(l)];
  }
  summary.mean_mse = summary.reps > 0 ? mse_sum / summary.reps : 0.0;
  summary.records = std::move(records);
  return summary;
}

}  // namespace mfrkhs::sim
