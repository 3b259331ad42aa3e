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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "mfrkhs/mfrkhs.hpp"
#include "mfrkhs/simgen.hpp"
#include "oracles.hpp"

namespace {

using namespace mfrkhs;
using V = Vector<double>;
using M = Matrix<double>;
using Clock = std::chrono::steady_clock;

struct Suite {
  int failed = 0;
  std::vector<std::vector<double>> traces;  // every objective trace produced along the way
  double worst_orthonormality = 0.0;
  std::map<int, std::string> lines;

  void report(int id, const std::string& name, bool ok, const std::string& detail) {
    if (!ok) ++failed;
    lines[id] = std::string(ok ? "[PASS] " : "[FAIL] ") + std::to_string(id) + ". " + name + ": " + detail;
    std::fprintf(stderr, "%s\n", lines[id].c_str());
  }
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), f, a);
  return buf;
}

std::string counts_string(const std::vector<int>& c) {
  std::string s;
  for (std::size_t l = 0; l < c.size(); ++l) s += (l ? "/" : "") + std::to_string(c[l]);
  return s;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct ScenarioCheck {
  sim::ScenarioConfig cfg;
  double reference_mse;
  double time_limit_s;
};

/// Runs 20 replications and checks the selection pattern, MSE factor and runtime.
bool scenario_criterion(Suite& suite, const ScenarioCheck& check, std::string& detail) {
  constexpr int kReps = 20;
  const auto t0 = Clock::now();
  const auto summary = sim::run_replications(check.cfg, kReps, FitConfig<double>{});
  const double elapsed = seconds_since(t0);

  for (const auto& rec : summary.records)
    if (!rec.failure) suite.traces.push_back(rec.objective_trace);
  // Operator used by every replication of this scenario (the grid does not depend on the seed).
  const auto sim0 = sim::generate(check.cfg);
  suite.worst_orthonormality = std::max(suite.worst_orthonormality, sim0.op->orthonormality_error());

  bool pattern = summary.failures == 0;
  for (int l = 1; l <= sim::kCovariateCount; ++l) {
    const bool zero = std::find(check.cfg.zero_set.begin(), check.cfg.zero_set.end(), l) != check.cfg.zero_set.end();
    const int c = summary.selection_counts[static_cast<std::size_t>(l - 1)];
    pattern = pattern && (zero ? c <= 1 : c >= kReps - 1);
  }
  const double ratio = summary.mean_mse / check.reference_mse;
  const bool mse_ok = ratio >= 0.2 && ratio <= 5.0;
  const bool time_ok = elapsed <= check.time_limit_s;
  int unconverged = 0;
  for (const auto& rec : summary.records) unconverged += rec.converged ? 0 : 1;

  detail = "counts " + counts_string(summary.selection_counts) + " (M=" + sim::zero_set_shorthand(check.cfg.zero_set) +
           "), mean MSE " + fmt("%.4g", summary.mean_mse) + " vs " + fmt("%.4g", check.reference_mse) + " (ratio " +
           fmt("%.3g", ratio) + "), " + fmt("%.1f", elapsed) + " s, " + std::to_string(unconverged) +
           " fits at iteration cap, " + std::to_string(summary.failures) + " failures";
  return pattern && mse_ok && time_ok;
}

sim::ScenarioConfig one_dim_config(std::vector<int> zero_set, double sigma, std::uint64_t seed) {
  sim::ScenarioConfig cfg;
  cfg.zero_set = std::move(zero_set);
  cfg.sigma_noise = sigma;
  cfg.seed = seed;
  return cfg;
}

void criterion_1_to_4(Suite& suite) {
  std::string detail;
  {
    const bool ok = scenario_criterion(suite, {one_dim_config({5}, 0.01, 101), 0.0594, 600.0}, detail);
    suite.report(1, "one-dim gaussian sigma=0.01 M={5}", ok, detail);
  }
  {
    std::string d1, d2;
    const bool a = scenario_criterion(suite, {one_dim_config({1, 3, 5}, 0.01, 102), 0.0516, 600.0}, d1);
    const bool b = scenario_criterion(suite, {one_dim_config({1, 3, 4, 5}, 0.01, 103), 0.0259, 600.0}, d2);
    suite.report(2, "one-dim gaussian sigma=0.01 M={1,3,5} and M={1,3,4,5}", a && b, d1 + "; " + d2);
  }
  {
    const bool ok = scenario_criterion(suite, {one_dim_config({5}, 0.1, 104), 0.3118, 600.0}, detail);
    suite.report(3, "one-dim gaussian sigma=0.1 M={5}", ok, detail);
  }
  {
    sim::ScenarioConfig cfg;
    cfg.scenario = sim::Scenario::multi_dim;
    cfg.zero_set = {5};
    cfg.sigma_noise = 0.01;
    cfg.seed = 105;
    const bool ok = scenario_criterion(suite, {cfg, 0.0937, 1800.0}, detail);
    suite.report(4, "multi-dim gaussian sigma=0.01 M={5}, 51x51 response", ok, detail);
  }
}

void criterion_5(Suite& suite) {
  std::mt19937_64 rng(505);
  double worst = 0.0;
  for (int rep = 0; rep < 25; ++rep) {
    const int n = 1 + rep % 6;
    const int kappa = 1 + rep % 4;
    const int nodes = 9 + (rep * 5) % 25;  // 9..33
    const int p = 1 + rep % 3;
    auto inst = oracle::random_instance(rng, n, p, nodes, kappa);
    const Problem<double> prob(inst.data, inst.specs, inst.op);
    const V theta = oracle::random_theta(rng, p);
    const double lambda1 = 0.1;
    const auto rows = oracle::to_rows(solve_u(prob, theta, lambda1).values());
    const auto ku = inst.naive.apply_k(rows, oracle::to_vec(theta));
    const auto py = inst.naive.project_y();
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t k = 0; k < rows[i].size(); ++k) {
        const double r = ku[i][k] + lambda1 * rows[i][k] - py[i][k];
        num += r * r;
        den += py[i][k] * py[i][k];
      }
    worst = std::max(worst, std::sqrt(num / std::max(den, 1e-300)));
  }
  suite.report(5, "u-step linear-system oracle (25 instances)", worst <= 1e-8, "max relative residual " + fmt("%.3g", worst));
}

void criterion_6(Suite& suite) {
  std::mt19937_64 rng(606);
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const int n = 2 + rep % 4, p = 1 + rep % 5;
    auto inst = oracle::random_instance(rng, n, p, 11 + rep % 7, 1 + rep % 3);
    const Problem<double> prob(inst.data, inst.specs, inst.op);
    const auto u = oracle::random_u(rng, prob.responses().grid_ptr(), n);
    const auto quad = build_theta_quadratic(prob, u, 0.1, 0.4);
    const V theta = oracle::random_theta(rng, p, false).array() + 0.05;
    const V grad = quad.gradient(theta);
    const auto rows = oracle::to_rows(u.values());
    for (int l = 0; l < p; ++l) {
      auto tp = oracle::to_vec(theta), tm = tp;
      tp[static_cast<std::size_t>(l)] += 1e-5;
      tm[static_cast<std::size_t>(l)] -= 1e-5;
      const double fd = (inst.naive.objective(rows, tp, 0.1, 0.4) - inst.naive.objective(rows, tm, 0.1, 0.4)) / 2e-5;
      worst = std::max(worst, std::abs(fd - grad[l]) / std::max(1.0, std::abs(grad[l])));
    }
  }
  suite.report(6, "theta gradient vs central differences (50 instances)", worst <= 1e-5,
               "max relative error " + fmt("%.3g", worst));
}

void criterion_7(Suite& suite) {
  std::mt19937_64 rng(707);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> unif(0.1, 3.0);
  // The KKT guarantee holds at convergence; ill-conditioned draws can need more than the
  // default iteration cap, so run to convergence and report how many exceeded it.
  FitConfig<double> cfg;
  const int default_cap = cfg.cg_max_iters;
  cfg.cg_max_iters = 1000000;
  double worst_kkt = 0.0, worst_diag = 0.0;
  bool nonneg = true, converged = true;
  int over_default = 0, max_iters = 0;
  for (int rep = 0; rep < 50; ++rep) {
    const int p = 1 + rep % 8;
    M a(p, p + rep % 3);
    for (auto& e : a.reshaped()) e = nd(rng);
    ThetaQuadratic<double> quad;
    quad.Ktilde = a * a.transpose();
    quad.Dtilde = V(p);
    for (auto& e : quad.Dtilde) e = 2 * nd(rng);
    quad.lambda2 = 0.4;
    V start(p);
    for (auto& e : start) e = unif(rng);
    const auto r = solve_theta_nncg(quad, start, cfg);
    const V g = quad.gradient(r.theta);
    nonneg = nonneg && r.theta.minCoeff() >= 0.0;
    converged = converged && r.converged;
    over_default += r.iterations > default_cap ? 1 : 0;
    max_iters = std::max(max_iters, r.iterations);
    for (Eigen::Index l = 0; l < p; ++l) {
      const double viol = r.theta[l] > 0.0 ? std::abs(g[l]) / (1.0 + g.norm()) : std::max(0.0, -g[l]);
      worst_kkt = std::max(worst_kkt, viol);
    }
  }
  for (int rep = 0; rep < 50; ++rep) {
    const int p = 1 + rep % 8;
    ThetaQuadratic<double> quad;
    quad.Ktilde = M::Zero(p, p);
    quad.Dtilde = V(p);
    for (int l = 0; l < p; ++l) {
      quad.Ktilde(l, l) = unif(rng);
      quad.Dtilde[l] = 3 * nd(rng);
    }
    quad.lambda2 = 0.0;
    const auto r = solve_theta_nncg(quad, V(V::Ones(p)), FitConfig<double>{});
    converged = converged && r.converged;
    for (int l = 0; l < p; ++l)
      worst_diag = std::max(worst_diag, std::abs(r.theta[l] - std::max(0.0, -quad.Dtilde[l] / (2 * quad.Ktilde(l, l)))));
  }
  const bool ok = nonneg && converged && worst_kkt <= 1e-6 && worst_diag <= 1e-6;
  suite.report(7, "theta-step KKT and diagonal closed form (50 + 50 quadratics)", ok,
               "max KKT violation " + fmt("%.3g", worst_kkt) + ", max diagonal error " + fmt("%.3g", worst_diag) +
                   ", all converged: " + (converged ? "yes" : "no") + ", " + std::to_string(over_default) +
                   " runs needed more than " + std::to_string(default_cap) + " iterations (max " +
                   std::to_string(max_iters) + ")");
}

std::vector<MfRkhsModel<double>> fitted_models(Suite& suite, std::vector<sim::SimulatedData>& sims) {
  std::vector<MfRkhsModel<double>> models;
  for (int k = 0; k < 10; ++k) {
    sim::ScenarioConfig cfg = one_dim_config(k % 3 == 0 ? std::vector<int>{5} : k % 3 == 1 ? std::vector<int>{1, 3, 5}
                                                                                           : std::vector<int>{1, 3, 4, 5},
                                             0.01, 900 + static_cast<std::uint64_t>(k));
    cfg.n = 20;
    cfg.kernel = k % 2 ? KernelFamily::cauchy : KernelFamily::gaussian;
    sims.push_back(sim::generate(cfg));
    models.push_back(fit(sims.back().data, sims.back().kernel_specs(cfg.kernel, 1.0), sims.back().op, FitConfig<double>{}));
    suite.traces.push_back(models.back().report.objective_trace);
  }
  return models;
}

void criterion_9(Suite& suite) {
  std::vector<sim::SimulatedData> sims;
  const auto models = fitted_models(suite, sims);
  double worst = 0.0;
  for (std::size_t k = 0; k < models.size(); ++k) {
    const M base = predict_all<double>(models[k], sims[k].data.covariates).values();
    for (double c : {0.1, 3.7, 42.0}) {
      const M pr = predict_all<double>(rescaled(models[k], c), sims[k].data.covariates).values();
      worst = std::max(worst, (pr - base).cwiseAbs().maxCoeff() / std::max(base.cwiseAbs().maxCoeff(), 1e-300));
    }
  }
  suite.report(9, "scale equivalence of predictions (10 models x 3 factors)", worst <= 1e-10,
               "max relative deviation " + fmt("%.3g", worst));
}

void criterion_10(Suite& suite) {
  const std::vector<std::vector<int>> sets{{5}, {1, 3, 5}, {1, 3, 4, 5}};
  bool ok = true;
  std::string detail;
  for (std::size_t s = 0; s < sets.size(); ++s) {
    sim::ScenarioConfig cfg = one_dim_config(sets[s], 1e-300, 1000 + s);
    cfg.n = 20;
    const auto summary = sim::run_replications(cfg, 10, FitConfig<double>{});
    int matches = 0;
    for (const auto& rec : summary.records) {
      if (rec.failure) continue;
      suite.traces.push_back(rec.objective_trace);
      bool same = true;
      for (Eigen::Index l = 0; l < rec.theta_true.size(); ++l)
        same = same && ((rec.theta_hat[l] > kSelectionThreshold) == (rec.theta_true[l] > 0.0));
      matches += same ? 1 : 0;
    }
    ok = ok && matches == 10;
    detail += (s ? "; M=" : "M=") + sim::zero_set_shorthand(sets[s]) + " " + std::to_string(matches) + "/10 (counts " +
              counts_string(summary.selection_counts) + ")";
  }
  suite.report(10, "noiseless sign recovery, n=20", ok, detail);
}

void criterion_8(Suite& suite) {
  double worst = 0.0;
  for (const auto& t : suite.traces) worst = std::max(worst, max_trace_increase<double>(t));
  suite.report(8, "monotone objective traces", worst <= 1e-10,
               std::to_string(suite.traces.size()) + " traces, max relative increase " + fmt("%.3g", worst));
}

void criterion_11(Suite& suite) {
  suite.report(11, "sine eigenfunction orthonormality at scenario grids", suite.worst_orthonormality <= 1e-6,
               "max deviation " + fmt("%.3g", suite.worst_orthonormality));
}

}  // namespace

int main() {
  Suite suite;
  const auto t0 = Clock::now();
  criterion_5(suite);
  criterion_6(suite);
  criterion_7(suite);
  criterion_9(suite);
  criterion_10(suite);
  criterion_1_to_4(suite);
  criterion_8(suite);
  criterion_11(suite);
  std::printf("acceptance summary\n");
  for (const auto& [id, line] : suite.lines) std::printf("%s\n", line.c_str());
  std::printf("%d criteria failed, total %.1f s\n", suite.failed, seconds_since(t0));
  return suite.failed == 0 ? 0 : 1;
}
