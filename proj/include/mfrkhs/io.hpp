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

// JSON file formats for datasets, fitted models, operators, run configs and
// predictions. Reals are written in shortest round-trip form, so every
// write/load pair is lossless.

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mfrkhs/dataset.hpp"
#include "mfrkhs/kernels.hpp"
#include "mfrkhs/model.hpp"
#include "mfrkhs/solver.hpp"

namespace mfrkhs::io {

inline constexpr int kFormatVersion = 1;

/// Parameters behind a simulated dataset.
struct Truth {
  Vector<double> theta;
  SampleSet<double> u;
  std::vector<int> sine_counts;
};

struct DatasetFile {
  Dataset<double> data;
  std::optional<Truth> truth;
};

struct RunConfig {
  FitConfig<double> fit;
  std::vector<KernelSpec<double>> kernels;  // one shared spec or one per covariate
  std::optional<std::vector<int>> sine_counts;
  std::optional<std::filesystem::path> operator_file;

  /// Kernel list expanded to p entries.
  std::vector<KernelSpec<double>> kernels_for(std::size_t p) const;
};

/// Writes to a temporary sibling and renames it over `path`.
void atomic_write(const std::filesystem::path& path, const std::string& contents);

std::string dataset_to_string(const DatasetFile& file);
DatasetFile dataset_from_string(const std::string& text);
void write_dataset(const std::filesystem::path& path, const DatasetFile& file);
DatasetFile load_dataset(const std::filesystem::path& path);

std::string model_to_string(const MfRkhsModel<double>& model);
MfRkhsModel<double> model_from_string(const std::string& text);
void save_model(const std::filesystem::path& path, const MfRkhsModel<double>& model);
MfRkhsModel<double> load_model(const std::filesystem::path& path);

std::string operator_to_string(const FiniteRankOperator<double>& op);
FiniteRankOperator<double> operator_from_string(const std::string& text);
FiniteRankOperator<double> load_operator(const std::filesystem::path& path);

RunConfig run_config_from_string(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);

std::string predictions_to_string(const SampleSet<double>& predictions);
SampleSet<double> predictions_from_string(const std::string& text);

/// Fit report: iterations, final objective, theta, selected covariates, trace.
std::string report_to_string(const MfRkhsModel<double>& model);

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);

std::string read_file(const std::filesystem::path& path);

}  // namespace mfrkhs::io
