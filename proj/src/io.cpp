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

#include "mfrkhs/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include "json.hpp"

namespace mfrkhs::io {

using json = nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw ParseError(path + ": " + what); }

const json& require(const json& j, const char* key, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) fail(path, std::string("missing field '") + key + "'");
  return *it;
}

double as_double(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

int as_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

const json& as_array(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array");
  return j;
}

Vector<double> as_vector(const json& j, const std::string& path) {
  as_array(j, path);
  Vector<double> v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) v[static_cast<Eigen::Index>(k)] = as_double(j[k], path + "[" + std::to_string(k) + "]");
  return v;
}

std::vector<int> as_int_list(const json& j, const std::string& path) {
  as_array(j, path);
  std::vector<int> out;
  for (std::size_t k = 0; k < j.size(); ++k) out.push_back(as_int(j[k], path + "[" + std::to_string(k) + "]"));
  return out;
}

Matrix<double> as_rows(const json& j, const std::string& path, Eigen::Index cols) {
  as_array(j, path);
  Matrix<double> m(static_cast<Eigen::Index>(j.size()), cols);
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string row_path = path + "[" + std::to_string(i) + "]";
    as_array(j[i], row_path);
    if (static_cast<Eigen::Index>(j[i].size()) != cols)
      fail(row_path, "expected " + std::to_string(cols) + " values, got " + std::to_string(j[i].size()));
    for (std::size_t k = 0; k < j[i].size(); ++k)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          as_double(j[i][k], row_path + "[" + std::to_string(k) + "]");
  }
  return m;
}

GridPtr<double> grid_from(const json& axes, const std::string& path) {
  as_array(axes, path);
  std::vector<Vector<double>> v;
  for (std::size_t a = 0; a < axes.size(); ++a) v.push_back(as_vector(axes[a], path + "[" + std::to_string(a) + "]"));
  try {
    return make_grid<double>(std::move(v));
  } catch (const InvalidGridError& e) {
    fail(path, e.what());
  }
}

json axes_to_json(const Grid<double>& grid) {
  json axes = json::array();
  for (const auto& x : grid.axes()) axes.push_back(std::vector<double>(x.data(), x.data() + x.size()));
  return axes;
}

json rows_to_json(const Matrix<double>& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Vector<double>& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json sample_set_to_json(const SampleSet<double>& s) {
  return json{{"axes", axes_to_json(s.grid())}, {"samples", rows_to_json(s.values())}};
}

SampleSet<double> sample_set_from(const json& j, const std::string& path) {
  const auto grid = grid_from(require(j, "axes", path), path + ".axes");
  Matrix<double> rows = as_rows(require(j, "samples", path), path + ".samples", grid->node_count());
  if (!rows.allFinite()) fail(path + ".samples", "non-finite value");
  return SampleSet<double>(grid, std::move(rows));
}

json parse(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(what + ": " + e.what());
  }
}

void check_header(const json& j, const std::string& format) {
  const std::string got = as_string(require(j, "format", "$"), "$.format");
  if (got != format) fail("$.format", "expected '" + format + "', got '" + got + "'");
  const int version = as_int(require(j, "format_version", "$"), "$.format_version");
  if (version != kFormatVersion)
    throw VersionError("unsupported " + format + " format_version " + std::to_string(version) + " (expected " +
                       std::to_string(kFormatVersion) + ")");
}

json kernel_to_json(const KernelSpec<double>& k) {
  return json{{"family", std::string(to_string(k.family))}, {"bandwidth", k.bandwidth}};
}

KernelSpec<double> kernel_from(const json& j, const std::string& path) {
  try {
    return KernelSpec<double>(kernel_family_from_string(as_string(require(j, "family", path), path + ".family")),
                              as_double(require(j, "bandwidth", path), path + ".bandwidth"));
  } catch (const InvalidArgumentError& e) {
    fail(path, e.what());
  }
}

json fit_config_to_json(const FitConfig<double>& c) {
  json j{{"lambda1", c.lambda1},         {"lambda2", c.lambda2},           {"bcd_tol", c.bcd_tol},
         {"bcd_max_iters", c.bcd_max_iters}, {"cg_tol", c.cg_tol},             {"cg_max_iters", c.cg_max_iters},
         {"backtrack_rho", c.backtrack_rho}, {"backtrack_max", c.backtrack_max}};
  j["theta_init"] = c.theta_init ? vector_to_json(*c.theta_init) : json("ones");
  return j;
}

FitConfig<double> fit_config_from(const json& j, const std::string& path) {
  FitConfig<double> c;
  if (!j.is_object()) fail(path, "expected an object");
  auto real = [&](const char* key, double& out) {
    if (j.contains(key)) out = as_double(j[key], path + "." + key);
  };
  auto integer = [&](const char* key, int& out) {
    if (j.contains(key)) out = as_int(j[key], path + "." + key);
  };
  real("lambda1", c.lambda1);
  real("lambda2", c.lambda2);
  real("bcd_tol", c.bcd_tol);
  integer("bcd_max_iters", c.bcd_max_iters);
  real("cg_tol", c.cg_tol);
  integer("cg_max_iters", c.cg_max_iters);
  real("backtrack_rho", c.backtrack_rho);
  integer("backtrack_max", c.backtrack_max);
  if (j.contains("theta_init")) {
    const json& t = j["theta_init"];
    if (t.is_string()) {
      if (t.get<std::string>() != "ones") fail(path + ".theta_init", "expected \"ones\" or an array");
    } else {
      c.theta_init = as_vector(t, path + ".theta_init");
    }
  }
  try {
    c.validate();
  } catch (const InvalidArgumentError& e) {
    fail(path, e.what());
  }
  return c;
}

json operator_to_json(const FiniteRankOperator<double>& op) {
  return json{{"axes", axes_to_json(op.grid())},
              {"eigenvalues", vector_to_json(op.eigenvalues())},
              {"eigenfunctions", rows_to_json(op.eigenfunctions())}};
}

FiniteRankOperator<double> operator_from(const json& j, const std::string& path) {
  const auto grid = grid_from(require(j, "axes", path), path + ".axes");
  Vector<double> delta = as_vector(require(j, "eigenvalues", path), path + ".eigenvalues");
  Matrix<double> w = as_rows(require(j, "eigenfunctions", path), path + ".eigenfunctions", grid->node_count());
  if (w.rows() != delta.size()) fail(path, "eigenvalue and eigenfunction counts differ");
  try {
    return FiniteRankOperator<double>(grid, std::move(delta), std::move(w));
  } catch (const Error& e) {
    fail(path, e.what());
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void atomic_write(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out << contents;
    out.flush();
    if (!out) throw Error("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error("cannot rename '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
  }
}

// Datasets ------------------------------------------------------------------

std::string dataset_to_string(const DatasetFile& file) {
  const auto& d = file.data;
  d.validate();
  json covs = json::array();
  const auto names = d.names.empty() ? default_names(d.p()) : d.names;
  for (std::size_t l = 0; l < d.p(); ++l) {
    json c = sample_set_to_json(d.covariates[l]);
    c["name"] = names[l];
    covs.push_back(std::move(c));
  }
  json j{{"format", "mfrkhs-dataset"},
         {"format_version", kFormatVersion},
         {"response", sample_set_to_json(d.responses)},
         {"covariates", std::move(covs)}};
  if (file.truth) {
    j["truth"] = json{{"theta", vector_to_json(file.truth->theta)},
                      {"u", rows_to_json(file.truth->u.values())},
                      {"sine_counts", file.truth->sine_counts}};
  }
  return j.dump() + "\n";
}

DatasetFile dataset_from_string(const std::string& text) {
  const json j = parse(text, "dataset");
  try {
    check_header(j, "mfrkhs-dataset");
    DatasetFile out{Dataset<double>{sample_set_from(require(j, "response", "$"), "$.response"), {}, {}}, std::nullopt};
    const json& covs = as_array(require(j, "covariates", "$"), "$.covariates");
    for (std::size_t l = 0; l < covs.size(); ++l) {
      const std::string path = "$.covariates[" + std::to_string(l) + "]";
      out.data.covariates.push_back(sample_set_from(covs[l], path));
      out.data.names.push_back(covs[l].contains("name") ? as_string(covs[l]["name"], path + ".name")
                                                        : "x" + std::to_string(l + 1));
      if (out.data.covariates.back().size() != out.data.n())
        fail(path + ".samples", "has " + std::to_string(out.data.covariates.back().size()) +
                                    " samples, response has " + std::to_string(out.data.n()));
    }
    out.data.validate();
    if (j.contains("truth")) {
      const json& t = j["truth"];
      Truth truth{as_vector(require(t, "theta", "$.truth"), "$.truth.theta"),
                  SampleSet<double>(out.data.responses.grid_ptr(),
                                    as_rows(require(t, "u", "$.truth"), "$.truth.u", out.data.responses.grid().node_count())),
                  t.contains("sine_counts") ? as_int_list(t["sine_counts"], "$.truth.sine_counts") : std::vector<int>{}};
      out.truth = std::move(truth);
    }
    return out;
  } catch (const json::exception& e) {
    throw ParseError(std::string("dataset: ") + e.what());
  }
}

void write_dataset(const std::filesystem::path& path, const DatasetFile& file) {
  atomic_write(path, dataset_to_string(file));
}

DatasetFile load_dataset(const std::filesystem::path& path) {
  try {
    return dataset_from_string(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

// Models --------------------------------------------------------------------

std::string model_to_string(const MfRkhsModel<double>& m) {
  m.validate();
  json kernels = json::array();
  for (const auto& k : m.specs) kernels.push_back(kernel_to_json(k));
  json covs = json::array();
  for (std::size_t l = 0; l < m.train_x.size(); ++l) {
    json c = sample_set_to_json(m.train_x[l]);
    c["name"] = l < m.names.size() ? m.names[l] : "x" + std::to_string(l + 1);
    covs.push_back(std::move(c));
  }
  const json report{{"iterations", m.report.iterations},
                    {"final_objective", m.report.final_objective},
                    {"converged", m.report.converged},
                    {"inner_stalls", m.report.inner_stalls},
                    {"objective_trace", m.report.objective_trace}};
  const json j{{"format", "mfrkhs-model"},
               {"format_version", kFormatVersion},
               {"kernels", std::move(kernels)},
               {"operator", operator_to_json(*m.op)},
               {"theta", vector_to_json(m.theta)},
               {"u", rows_to_json(m.u.values())},
               {"train_covariates", std::move(covs)},
               {"config", fit_config_to_json(m.config)},
               {"report", report}};
  return j.dump() + "\n";
}

MfRkhsModel<double> model_from_string(const std::string& text) {
  const json j = parse(text, "model");
  try {
    check_header(j, "mfrkhs-model");
    MfRkhsModel<double> m{{}, nullptr, {}, SampleSet<double>::zeros(unit_cube_grid<double>(1, 2), 0), {}, {}, {}, {}};
    const json& kernels = as_array(require(j, "kernels", "$"), "$.kernels");
    for (std::size_t l = 0; l < kernels.size(); ++l)
      m.specs.push_back(kernel_from(kernels[l], "$.kernels[" + std::to_string(l) + "]"));
    m.op = std::make_shared<const FiniteRankOperator<double>>(operator_from(require(j, "operator", "$"), "$.operator"));
    m.theta = as_vector(require(j, "theta", "$"), "$.theta");
    for (Eigen::Index l = 0; l < m.theta.size(); ++l)
      if (!(m.theta[l] >= 0.0)) fail("$.theta[" + std::to_string(l) + "]", "must be nonnegative");
    m.u = SampleSet<double>(m.op->grid_ptr(), as_rows(require(j, "u", "$"), "$.u", m.op->grid().node_count()));
    const json& covs = as_array(require(j, "train_covariates", "$"), "$.train_covariates");
    for (std::size_t l = 0; l < covs.size(); ++l) {
      const std::string path = "$.train_covariates[" + std::to_string(l) + "]";
      m.train_x.push_back(sample_set_from(covs[l], path));
      m.names.push_back(covs[l].contains("name") ? as_string(covs[l]["name"], path + ".name")
                                                 : "x" + std::to_string(l + 1));
    }
    m.config = fit_config_from(require(j, "config", "$"), "$.config");
    const json& r = require(j, "report", "$");
    m.report.iterations = as_int(require(r, "iterations", "$.report"), "$.report.iterations");
    m.report.final_objective = as_double(require(r, "final_objective", "$.report"), "$.report.final_objective");
    m.report.converged = require(r, "converged", "$.report").get<bool>();
    if (r.contains("inner_stalls")) m.report.inner_stalls = as_int(r["inner_stalls"], "$.report.inner_stalls");
    if (r.contains("objective_trace")) {
      const Vector<double> t = as_vector(r["objective_trace"], "$.report.objective_trace");
      m.report.objective_trace.assign(t.data(), t.data() + t.size());
    }
    try {
      m.validate();
    } catch (const Error& e) {
      fail("$", e.what());
    }
    return m;
  } catch (const json::exception& e) {
    throw ParseError(std::string("model: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const MfRkhsModel<double>& model) {
  atomic_write(path, model_to_string(model));
}

MfRkhsModel<double> load_model(const std::filesystem::path& path) {
  try {
    return model_from_string(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

// Operators, configs, predictions ------------------------------------------------

std::string operator_to_string(const FiniteRankOperator<double>& op) {
  json j = operator_to_json(op);
  j["format"] = "mfrkhs-operator";
  j["format_version"] = kFormatVersion;
  return j.dump() + "\n";
}

FiniteRankOperator<double> operator_from_string(const std::string& text) {
  const json j = parse(text, "operator");
  try {
    check_header(j, "mfrkhs-operator");
    return operator_from(j, "$");
  } catch (const json::exception& e) {
    throw ParseError(std::string("operator: ") + e.what());
  }
}

FiniteRankOperator<double> load_operator(const std::filesystem::path& path) {
  return operator_from_string(read_file(path));
}

std::vector<KernelSpec<double>> RunConfig::kernels_for(std::size_t p) const {
  if (kernels.empty()) return std::vector<KernelSpec<double>>(p, KernelSpec<double>());
  if (kernels.size() == 1) return std::vector<KernelSpec<double>>(p, kernels.front());
  if (kernels.size() != p)
    throw InvalidArgumentError("config lists " + std::to_string(kernels.size()) + " kernels for " +
                               std::to_string(p) + " covariates");
  return kernels;
}

RunConfig run_config_from_string(const std::string& text) {
  const json j = parse(text, "config");
  try {
    if (!j.is_object()) fail("$", "expected an object");
    RunConfig c;
    if (j.contains("fit")) c.fit = fit_config_from(j["fit"], "$.fit");
    if (j.contains("kernel")) c.kernels.push_back(kernel_from(j["kernel"], "$.kernel"));
    if (j.contains("kernels")) {
      const json& ks = as_array(j["kernels"], "$.kernels");
      for (std::size_t l = 0; l < ks.size(); ++l) c.kernels.push_back(kernel_from(ks[l], "$.kernels[" + std::to_string(l) + "]"));
    }
    if (j.contains("operator")) {
      const json& op = j["operator"];
      if (op.contains("sine_counts")) c.sine_counts = as_int_list(op["sine_counts"], "$.operator.sine_counts");
      if (op.contains("file")) c.operator_file = as_string(op["file"], "$.operator.file");
      if (!c.sine_counts && !c.operator_file) fail("$.operator", "needs 'sine_counts' or 'file'");
    }
    return c;
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  RunConfig c = run_config_from_string(read_file(path));
  if (c.operator_file && c.operator_file->is_relative()) c.operator_file = path.parent_path() / *c.operator_file;
  return c;
}

std::string predictions_to_string(const SampleSet<double>& predictions) {
  json j = sample_set_to_json(predictions);
  j["format"] = "mfrkhs-predictions";
  j["format_version"] = kFormatVersion;
  return j.dump() + "\n";
}

SampleSet<double> predictions_from_string(const std::string& text) {
  const json j = parse(text, "predictions");
  try {
    check_header(j, "mfrkhs-predictions");
    return sample_set_from(j, "$");
  } catch (const json::exception& e) {
    throw ParseError(std::string("predictions: ") + e.what());
  }
}

std::string report_to_string(const MfRkhsModel<double>& m) {
  const json j{{"iterations", m.report.iterations},
               {"final_objective", m.report.final_objective},
               {"converged", m.report.converged},
               {"inner_stalls", m.report.inner_stalls},
               {"theta", vector_to_json(m.theta)},
               {"selected", selected_variables(m)},
               {"objective_trace", m.report.objective_trace}};
  return j.dump(2) + "\n";
}

}  // namespace mfrkhs::io
