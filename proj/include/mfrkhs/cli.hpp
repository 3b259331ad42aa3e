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

#include <iosfwd>
#include <string>
#include <vector>

namespace mfrkhs::cli {

/// Runs one command line (args[0] is the program name). Results go to `out`,
/// diagnostics and usage to `err`. Returns the process exit status.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Header of the repro CSV.
inline constexpr const char* kReproHeader = "scenario,M,kernel,sigma,x1,x2,x3,x4,x5,mean_mse,reps";

}  // namespace mfrkhs::cli
