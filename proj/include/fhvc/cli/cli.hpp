// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License.  You
// may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or
// implied.  See the License for the specific language governing
// permissions and limitations under the License.

#pragma once

#include <filesystem>
#include <initializer_list>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fhvc/model/train.hpp"

namespace fhvc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

// Runs one command line (without the program name). Results go to `out`,
// diagnostics to `err`.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);
int run(std::initializer_list<std::string> args, std::ostream& out, std::ostream& err);

// Header "epoch,loss,dev_elbo,recon,kl_z1,kl_z2,mu_prior,disc".
void write_history_csv(const model::TrainHistory& history, const std::filesystem::path& path);

std::vector<std::string> split_list(const std::string& text);

}  // namespace fhvc::cli
