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

#include "mfrkhs/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "mfrkhs/io.hpp"
#include "mfrkhs/model.hpp"
#include "mfrkhs/simgen.hpp"

namespace mfrkhs::cli {

namespace {

namespace fs = std::filesystem;

struct SimulateArgs {
  std::string scenario = "one-dim";
  std::string m = "5";
  std::string kernel = "gaussian";
  double sigma = 0.01;
  double bandwidth = 1.0;
  int n = 50;
  std::uint64_t seed = 0;
  int response_points = 0;
  bool reindexed_u = false;
  std::string out;
};

struct FitArgs {
  std::string data, config, model_out, report_out;
};

struct PredictArgs {
  std::string model, data, out;
};

struct ReproArgs {
  int table = 1;
  int reps = 20;
  std::uint64_t seed = 0;
  int n = 50;
  int threads = 1;
  std::string out;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& err) {
  sim::ScenarioConfig cfg;
  cfg.scenario = sim::scenario_from_string(a.scenario);
  cfg.zero_set = sim::parse_zero_set(a.m);
  cfg.kernel = kernel_family_from_string(a.kernel);
  cfg.sigma_noise = a.sigma;
  cfg.bandwidth = a.bandwidth;
  cfg.n = a.n;
  cfg.seed = a.seed;
  cfg.grids.response_points = a.response_points;
  cfg.reindexed_u = a.reindexed_u;
  const sim::SimulatedData s = sim::generate(cfg);
  io::write_dataset(a.out, io::DatasetFile{s.data, io::Truth{s.theta_true, s.u_true, s.sine_counts}});
  err << "wrote " << a.out << " (n=" << cfg.n << ", scenario " << a.scenario << ")\n";
  return 0;
}

int cmd_fit(const FitArgs& a, std::ostream& err) {
  const io::DatasetFile file = io::load_dataset(a.data);
  io::RunConfig cfg = a.config.empty() ? io::RunConfig{} : io::load_run_config(a.config);

  std::shared_ptr<const FiniteRankOperator<double>> op;
  if (cfg.operator_file) {
    op = std::make_shared<const FiniteRankOperator<double>>(io::load_operator(*cfg.operator_file));
  } else {
    std::vector<int> counts;
    if (cfg.sine_counts) counts = *cfg.sine_counts;
    else if (file.truth && !file.truth->sine_counts.empty()) counts = file.truth->sine_counts;
    else throw InvalidArgumentError("no operator: give operator.sine_counts or operator.file in the config");
    op = std::make_shared<const FiniteRankOperator<double>>(
        make_sine_projection<double>(std::span<const int>(counts), file.data.responses.grid_ptr()));
  }

  const auto model = fit(file.data, cfg.kernels_for(file.data.p()), op, cfg.fit);
  io::save_model(a.model_out, model);
  if (!a.report_out.empty()) io::atomic_write(a.report_out, io::report_to_string(model));
  err << "fit: " << model.report.iterations << " iterations, q = " << io::format_double(model.report.final_objective)
      << (model.report.converged ? "" : " (iteration limit reached)") << "\n";
  return 0;
}

int cmd_predict(const PredictArgs& a) {
  const auto model = io::load_model(a.model);
  const io::DatasetFile file = io::load_dataset(a.data);
  const auto yhat = predict_all<double>(model, file.data.covariates);
  io::atomic_write(a.out, io::predictions_to_string(yhat));
  return 0;
}

int cmd_evaluate(const PredictArgs& a, std::ostream& out) {
  const auto model = io::load_model(a.model);
  const io::DatasetFile file = io::load_dataset(a.data);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", evaluate_mse(model, file.data));
  out << buf << "\n";
  return 0;
}

int cmd_repro(const ReproArgs& a, std::ostream& err) {
  const bool multi = a.table == 3 || a.table == 4;
  const double sigma = (a.table == 1 || a.table == 3) ? 0.01 : 0.1;
  const std::vector<std::string> zero_sets{"5", "135", "1345"};
  const std::vector<KernelFamily> kernels{KernelFamily::exponential, KernelFamily::gaussian, KernelFamily::cauchy};

  std::ostringstream csv;
  csv << kReproHeader << "\n";
  std::uint64_t cell = 0;
  for (const auto& m : zero_sets) {
    for (KernelFamily k : kernels) {
      sim::ScenarioConfig cfg;
      cfg.scenario = multi ? sim::Scenario::multi_dim : sim::Scenario::one_dim;
      cfg.zero_set = sim::parse_zero_set(m);
      cfg.kernel = k;
      cfg.sigma_noise = sigma;
      cfg.n = a.n;
      cfg.seed = sim::derive_seed(a.seed, cell++);
      const auto summary = sim::run_replications(cfg, a.reps, FitConfig<double>{}, a.threads);
      if (summary.failures > 0)
        err << "repro: " << summary.failures << " failed replications in cell M=" << m << " kernel=" << to_string(k)
            << "\n";
      csv << sim::to_string(cfg.scenario) << "," << m << "," << to_string(k) << "," << io::format_double(sigma);
      for (int c : summary.selection_counts) csv << "," << c;
      csv << "," << io::format_double(summary.mean_mse) << "," << summary.reps << "\n";
      err << "repro: table " << a.table << " M=" << m << " kernel=" << to_string(k) << " done\n";
    }
  }
  io::atomic_write(a.out, csv.str());
  return 0;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Nonlinear function-on-function regression with lasso variable selection", "mfrkhs"};
  app.require_subcommand(1);

  SimulateArgs sim_args;
  auto* simulate = app.add_subcommand("simulate", "Generate a simulated dataset");
  simulate->add_option("--scenario", sim_args.scenario, "one-dim or multi-dim")->check(CLI::IsMember({"one-dim", "multi-dim"}));
  simulate->add_option("--m", sim_args.m, "Zero set shorthand: 5, 135 or 1345");
  simulate->add_option("--kernel", sim_args.kernel, "gaussian, cauchy or exponential")
      ->check(CLI::IsMember({"gaussian", "cauchy", "exponential"}));
  simulate->add_option("--sigma", sim_args.sigma, "Noise standard deviation");
  simulate->add_option("--bandwidth", sim_args.bandwidth, "Kernel bandwidth sigma_g");
  simulate->add_option("--n", sim_args.n, "Sample count");
  simulate->add_option("--seed", sim_args.seed, "Master seed");
  simulate->add_option("--response-points", sim_args.response_points, "Response grid points per axis (0: default)");
  simulate->add_flag("--reindexed-u", sim_args.reindexed_u, "Multi-dim: use nonvanishing u_j indexing");
  simulate->add_option("--out", sim_args.out, "Output dataset file")->required();

  FitArgs fit_args;
  auto* fitc = app.add_subcommand("fit", "Fit a model to a dataset");
  fitc->add_option("--data", fit_args.data, "Dataset file")->required();
  fitc->add_option("--config", fit_args.config, "Run config file");
  fitc->add_option("--model-out", fit_args.model_out, "Output model file")->required();
  fitc->add_option("--report-out", fit_args.report_out, "Output fit report");

  PredictArgs pred_args;
  auto* predictc = app.add_subcommand("predict", "Predict responses for a dataset's covariates");
  predictc->add_option("--model", pred_args.model, "Model file")->required();
  predictc->add_option("--data", pred_args.data, "Dataset file")->required();
  predictc->add_option("--out", pred_args.out, "Output predictions file")->required();

  PredictArgs eval_args;
  auto* evaluate = app.add_subcommand("evaluate", "Print the fitting MSE of a model on a dataset");
  evaluate->add_option("--model", eval_args.model, "Model file")->required();
  evaluate->add_option("--data", eval_args.data, "Dataset file")->required();

  ReproArgs repro_args;
  auto* repro = app.add_subcommand("repro", "Run the replication grid of one simulation table");
  repro->add_option("--table", repro_args.table, "Table 1-4")->check(CLI::Range(1, 4))->required();
  repro->add_option("--reps", repro_args.reps, "Replications per cell");
  repro->add_option("--seed", repro_args.seed, "Master seed");
  repro->add_option("--n", repro_args.n, "Sample count");
  repro->add_option("--threads", repro_args.threads, "Worker threads");
  repro->add_option("--out", repro_args.out, "Output CSV")->required();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code != 0) err << app.help();
    return code;
  }

  try {
    if (*simulate) return cmd_simulate(sim_args, err);
    if (*fitc) return cmd_fit(fit_args, err);
    if (*predictc) return cmd_predict(pred_args);
    if (*evaluate) return cmd_evaluate(eval_args, out);
    if (*repro) return cmd_repro(repro_args, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  err << app.help();
  return 2;
}

}  // namespace mfrkhs::cli
