// SPDX-License-Identifier: Apache-2.0
//
// atmochan: transmittance statistics of atmospheric quantum channels
// Copyright (C) 2026 The atmochan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include "config.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace atmochan::cli {

struct WorkflowOptions {
    std::filesystem::path out_dir = ".";
    std::optional<std::uint64_t> seed;   // overrides sampling.seed
    std::optional<unsigned> threads;     // overrides sampling.threads
    std::filesystem::path measured;      // fit only
};

// Each workflow writes its CSV files into out_dir and throws on failure;
// main() maps the exception type to an exit code.
void run_simulate_pdt(const RunConfig &config, const WorkflowOptions &options);
void run_fit(const RunConfig &config, const WorkflowOptions &options);
void run_squeezing(const RunConfig &config, const WorkflowOptions &options);
void run_entanglement(const RunConfig &config, const WorkflowOptions &options);

} // namespace atmochan::cli
