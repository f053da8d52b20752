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

#include "atmochan/beam_model.hpp"
#include "atmochan/channel_stats.hpp"
#include "atmochan/pdt_engine.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace atmochan::cli {

// Invalid configuration (exit code 2). Messages start with the JSON pointer
// of the offending entry.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ChannelConfig {
    std::string name = "channel";
    TurbulenceParams turbulence;
    ScatteringParams scattering;
    ExtinctionSpec extinction;
};

struct SamplingConfig {
    std::size_t n = 1000000;
    std::uint64_t seed = 1;
    std::size_t grid_size = 512;
    std::optional<double> bandwidth;
    unsigned threads = 0;
};

struct QuantumConfig {
    double input_db = -2.4;
    double eta_opt = 0.88;
    double eta_det = 0.9;
    double eta_min = 0.0; // postselection threshold for the entanglement maps
    std::vector<double> thresholds;
    std::vector<double> xi_grid;
    std::vector<double> displacement_grid;

    double deterministic_factor() const { return eta_opt * eta_det; }
};

struct FitConfig {
    ParameterBox bounds;
    std::size_t budget = 500;
    std::size_t samples_per_eval = 100000;
    std::size_t bins = kDefaultHistogramBins;
};

struct RunConfig {
    ChannelGeometry geometry;
    // One entry unless the file lists "channels"; then outputs carry the
    // channel name as a suffix.
    std::vector<ChannelConfig> channels;
    bool named_channels = false;
    SamplingConfig sampling;
    QuantumConfig quantum;
    FitConfig fit;
    std::string source_text;
};

RunConfig parse_config(const std::string &json_text);
RunConfig load_config(const std::filesystem::path &path);

} // namespace atmochan::cli
