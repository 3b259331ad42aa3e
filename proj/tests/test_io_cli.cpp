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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "mfrkhs/cli.hpp"
#include "mfrkhs/io.hpp"
#include "mfrkhs/mfrkhs.hpp"
#include "mfrkhs/simgen.hpp"
#include "oracles.hpp"

namespace mfrkhs {
namespace {

namespace fs = std::filesystem;
using V = Vector<double>;

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("mfrkhs_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  static int run(std::vector<std::string> args, std::string* out = nullptr, std::string* err = nullptr) {
    args.insert(args.begin(), "mfrkhs");
    std::ostringstream o, e;
    const int code = cli::run_command(args, o, e);
    if (out) *out = o.str();
    if (err) *err = e.str();
    return code;
  }

  fs::path dir_;
};

sim::SimulatedData small_sim(std::uint64_t seed, int n = 6, double sigma = 0.01) {
  sim::ScenarioConfig cfg;
  cfg.n = n;
  cfg.seed = seed;
  cfg.sigma_noise = sigma;
  return sim::generate(cfg);
}

MfRkhsModel<double> small_model(const sim::SimulatedData& s) {
  FitConfig<double> cfg;
  cfg.bcd_max_iters = 20;
  return fit(s.data, s.kernel_specs(KernelFamily::gaussian, 1.0), s.op, cfg);
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(io::format_double(0.1), "0.1");
  EXPECT_EQ(io::format_double(1.0), "1");
  const double x = 0.1 + 0.2;
  EXPECT_EQ(std::stod(io::format_double(x)), x);
}

TEST(DatasetFormat, RoundTripIsExact) {
  const auto s = small_sim(3);
  const io::DatasetFile file{s.data, io::Truth{s.theta_true, s.u_true, s.sine_counts}};
  const auto back = io::dataset_from_string(io::dataset_to_string(file));
  EXPECT_EQ(back.data.responses.values(), s.data.responses.values());
  EXPECT_TRUE(*back.data.responses.grid_ptr() == s.data.responses.grid());
  ASSERT_EQ(back.data.p(), 5u);
  for (std::size_t l = 0; l < 5; ++l) EXPECT_EQ(back.data.covariates[l].values(), s.data.covariates[l].values());
  EXPECT_EQ(back.data.names, s.data.names);
  ASSERT_TRUE(back.truth.has_value());
  EXPECT_EQ(back.truth->theta, s.theta_true);
  EXPECT_EQ(back.truth->u.values(), s.u_true.values());
  EXPECT_EQ(back.truth->sine_counts, s.sine_counts);
}

TEST(DatasetFormat, WrongLengthSampleNamesCovariateAndSample) {
  const auto s = small_sim(4);
  auto j = nlohmann::json::parse(io::dataset_to_string(io::DatasetFile{s.data, std::nullopt}));
  j["covariates"][2]["samples"][4].erase(0);
  try {
    io::dataset_from_string(j.dump());
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("covariates[2]"), std::string::npos) << msg;
    EXPECT_NE(msg.find("samples[4]"), std::string::npos) << msg;
  }
}

TEST(DatasetFormat, VersionAndFormatChecks) {
  const auto s = small_sim(5, 2);
  auto j = nlohmann::json::parse(io::dataset_to_string(io::DatasetFile{s.data, std::nullopt}));
  j["format_version"] = 99;
  EXPECT_THROW(io::dataset_from_string(j.dump()), VersionError);
  j["format_version"] = io::kFormatVersion;
  j["format"] = "mfrkhs-model";
  EXPECT_THROW(io::dataset_from_string(j.dump()), ParseError);
  EXPECT_THROW(io::dataset_from_string("{\"format\": "), ParseError);
}

TEST_F(TempDir, SavedDatasetRefitsIdentically) {
  const auto s = small_sim(6);
  io::write_dataset(path("d.json"), io::DatasetFile{s.data, std::nullopt});
  const auto loaded = io::load_dataset(path("d.json"));
  FitConfig<double> cfg;
  cfg.bcd_max_iters = 20;
  const auto a = fit(s.data, s.kernel_specs(KernelFamily::gaussian, 1.0), s.op, cfg);
  const auto b = fit(loaded.data, s.kernel_specs(KernelFamily::gaussian, 1.0), s.op, cfg);
  EXPECT_EQ(a.theta, b.theta);
}

TEST_F(TempDir, ModelRoundTripGivesIdenticalPredictions) {
  const auto s = small_sim(7);
  const auto model = small_model(s);
  io::save_model(path("m.json"), model);
  const auto back = io::load_model(path("m.json"));
  EXPECT_EQ(back.theta, model.theta);
  EXPECT_EQ(back.u.values(), model.u.values());
  EXPECT_EQ(predict_all<double>(back, s.data.covariates).values(), predict_all<double>(model, s.data.covariates).values());
  EXPECT_EQ(back.report.objective_trace, model.report.objective_trace);
  EXPECT_EQ(back.config.lambda1, model.config.lambda1);
  EXPECT_EQ(back.names, model.names);
}

TEST(ModelFormat, TruncatedFileFailsWithLocation) {
  const auto s = small_sim(8, 3);
  const std::string text = io::model_to_string(small_model(s));
  try {
    io::model_from_string(text.substr(0, text.size() / 2));
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line"), std::string::npos) << e.what();
  }
}

TEST(ModelFormat, HandEditedThetaIsReflected) {
  const auto s = small_sim(9, 3);
  auto j = nlohmann::json::parse(io::model_to_string(small_model(s)));
  j["theta"][1] = 0.125;
  const auto m = io::model_from_string(j.dump());
  EXPECT_EQ(m.theta[1], 0.125);
  j["theta"][1] = -1.0;
  EXPECT_THROW(io::model_from_string(j.dump()), ParseError);
  j["theta"][1] = 0.5;
  j["format_version"] = 2;
  EXPECT_THROW(io::model_from_string(j.dump()), VersionError);
}

TEST(OperatorFormat, RoundTripAndCorruption) {
  const auto g = unit_cube_grid<double>(1, 21);
  const auto op = make_sine_projection<double>({4}, g);
  const auto back = io::operator_from_string(io::operator_to_string(op));
  EXPECT_EQ(back.eigenfunctions(), op.eigenfunctions());
  EXPECT_EQ(back.eigenvalues(), op.eigenvalues());
  auto j = nlohmann::json::parse(io::operator_to_string(op));
  j["eigenfunctions"][0][3] = 5.0;
  EXPECT_THROW(io::operator_from_string(j.dump()), Error);
}

TEST(RunConfigFormat, ParsesFitKernelAndOperator) {
  const auto c = io::run_config_from_string(R"({
    "fit": {"lambda1": 0.2, "lambda2": 0.5, "bcd_max_iters": 7, "theta_init": [1, 0, 2]},
    "kernel": {"family": "cauchy", "bandwidth": 0.5},
    "operator": {"sine_counts": [10]}
  })");
  EXPECT_EQ(c.fit.lambda1, 0.2);
  EXPECT_EQ(c.fit.lambda2, 0.5);
  EXPECT_EQ(c.fit.bcd_max_iters, 7);
  ASSERT_TRUE(c.fit.theta_init.has_value());
  EXPECT_EQ((*c.fit.theta_init)[2], 2.0);
  const auto ks = c.kernels_for(3);
  ASSERT_EQ(ks.size(), 3u);
  EXPECT_EQ(ks[2].family, KernelFamily::cauchy);
  EXPECT_EQ(*c.sine_counts, std::vector<int>{10});
  EXPECT_THROW(io::run_config_from_string(R"({"fit": {"backtrack_rho": 2}})"), ParseError);
  EXPECT_THROW(io::run_config_from_string(R"({"operator": {}})"), ParseError);
}

TEST_F(TempDir, SimulateFitPredictEvaluate) {
  std::string out, err;
  ASSERT_EQ(run({"simulate", "--n", "6", "--sigma", "0.05", "--seed", "3", "--out", path("d.json")}, &out, &err), 0) << err;
  std::ofstream(path("c.json")) << R"({"fit": {"bcd_max_iters": 15}})";
  ASSERT_EQ(run({"fit", "--data", path("d.json"), "--config", path("c.json"), "--model-out", path("m.json"),
                 "--report-out", path("r.json")}, &out, &err), 0) << err;
  EXPECT_TRUE(fs::exists(path("r.json")));
  ASSERT_EQ(run({"predict", "--model", path("m.json"), "--data", path("d.json"), "--out", path("p.json")}, &out, &err), 0)
      << err;
  const auto pred = io::predictions_from_string(io::read_file(path("p.json")));
  const auto model = io::load_model(path("m.json"));
  const auto data = io::load_dataset(path("d.json"));
  EXPECT_EQ(pred.values(), predict_all<double>(model, data.data.covariates).values());
  ASSERT_EQ(run({"evaluate", "--model", path("m.json"), "--data", path("d.json")}, &out, &err), 0) << err;
  EXPECT_NEAR(std::stod(out), evaluate_mse(model, data.data), 1e-6);
}

TEST_F(TempDir, EvaluateOnNoiselessTrainingDataPrintsZero) {
  std::string out, err;
  ASSERT_EQ(run({"simulate", "--n", "5", "--sigma", "1e-300", "--seed", "1", "--out", path("d.json")}, &out, &err), 0);
  std::ofstream(path("c.json")) << R"({"fit": {"lambda1": 1e-10, "lambda2": 1e-10, "bcd_max_iters": 50}})";
  ASSERT_EQ(run({"fit", "--data", path("d.json"), "--config", path("c.json"), "--model-out", path("m.json")}, &out, &err),
            0) << err;
  ASSERT_EQ(run({"evaluate", "--model", path("m.json"), "--data", path("d.json")}, &out, &err), 0);
  EXPECT_EQ(out, "0.000000\n");
  const auto mse = evaluate_mse(io::load_model(path("m.json")), io::load_dataset(path("d.json")).data);
  EXPECT_LE(mse, 1e-9);
}

TEST_F(TempDir, ReproIsDeterministic) {
  std::string out, err;
  const std::vector<std::string> base{"repro", "--table", "2", "--reps", "1", "--n", "5", "--seed", "7"};
  auto a = base, b = base;
  a.insert(a.end(), {"--out", path("a.csv")});
  b.insert(b.end(), {"--out", path("b.csv"), "--threads", "2"});
  ASSERT_EQ(run(a, &out, &err), 0) << err;
  ASSERT_EQ(run(b, &out, &err), 0) << err;
  const std::string ca = io::read_file(path("a.csv"));
  EXPECT_EQ(ca, io::read_file(path("b.csv")));
  std::istringstream lines(ca);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, cli::kReproHeader);
  int rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    EXPECT_EQ(line.rfind("one-dim,", 0), 0u) << line;
  }
  EXPECT_EQ(rows, 9);
}

TEST_F(TempDir, UsageAndErrorExitCodes) {
  std::string out, err;
  EXPECT_NE(run({"bogus"}, &out, &err), 0);
  EXPECT_NE(run({"simulate", "--nope", "1", "--out", path("x.json")}, &out, &err), 0);
  EXPECT_NE(err.find("simulate"), std::string::npos);
  EXPECT_NE(run({}, &out, &err), 0);
  EXPECT_EQ(run({"--help"}, &out, &err), 0);
  EXPECT_NE(run({"fit", "--data", path("missing.json"), "--model-out", path("m.json")}, &out, &err), 0);
  EXPECT_EQ(err.rfind("error: ", 0), 0u) << err;
  EXPECT_NE(run({"repro", "--table", "5", "--out", path("r.csv")}, &out, &err), 0);
  EXPECT_NE(run({"simulate", "--m", "17", "--out", path("x.json")}, &out, &err), 0);
  EXPECT_FALSE(fs::exists(path("x.json")));
}

}  // namespace
}  // namespace mfrkhs
