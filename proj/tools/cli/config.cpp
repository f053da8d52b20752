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

#include "config.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <set>
#include <sstream>

namespace atmochan::cli {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string &where, const std::string &what) {
    throw ConfigError(where + ": " + what);
}

// Rejects keys outside `allowed`; every block goes through here.
void check_keys(const json &obj, const std::string &where, std::initializer_list<const char *> allowed) {
    if (!obj.is_object())
        fail(where, "expected an object");
    const std::set<std::string> names(allowed.begin(), allowed.end());
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!names.count(it.key()))
            fail(where + "/" + it.key(), "unknown key");
}

double number(const json &obj, const std::string &where, const char *key, double fallback) {
    if (!obj.contains(key))
        return fallback;
    const json &v = obj.at(key);
    if (!v.is_number())
        fail(where + "/" + key, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x))
        fail(where + "/" + key, "must be finite");
    return x;
}

std::optional<double> optional_number(const json &obj, const std::string &where, const char *key) {
    if (!obj.contains(key) || obj.at(key).is_null())
        return std::nullopt;
    return number(obj, where, key, 0.0);
}

std::uint64_t unsigned_integer(const json &obj, const std::string &where, const char *key, std::uint64_t fallback) {
    if (!obj.contains(key))
        return fallback;
    const json &v = obj.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
        fail(where + "/" + key, "expected a non-negative integer");
    return v.get<std::uint64_t>();
}

void require(bool ok, const std::string &where, const std::string &what) {
    if (!ok)
        fail(where, what);
}

// Either an explicit ascending array or {"start", "stop", "count"}.
std::vector<double> grid(const json &obj, const std::string &where, const char *key, std::vector<double> fallback) {
    if (!obj.contains(key))
        return fallback;
    const json &v = obj.at(key);
    const std::string here = where + "/" + key;
    std::vector<double> out;
    if (v.is_array()) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number())
                fail(here + "/" + std::to_string(i), "expected a number");
            out.push_back(v[i].get<double>());
        }
    } else {
        check_keys(v, here, {"start", "stop", "count"});
        const double start = number(v, here, "start", 0.0);
        const double stop = number(v, here, "stop", 0.0);
        const std::uint64_t count = unsigned_integer(v, here, "count", 0);
        require(count >= 1, here + "/count", "must be at least 1");
        for (std::uint64_t i = 0; i < count; ++i)
            out.push_back(count == 1 ? start : start + (stop - start) * static_cast<double>(i) / static_cast<double>(count - 1));
    }
    require(!out.empty(), here, "must not be empty");
    for (std::size_t i = 0; i < out.size(); ++i) {
        require(std::isfinite(out[i]), here, "entries must be finite");
        if (i > 0)
            require(out[i] > out[i - 1], here, "entries must be strictly ascending");
    }
    return out;
}

std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return out;
}

ChannelGeometry parse_geometry(const json &root) {
    const std::string where = "/geometry";
    if (!root.contains("geometry"))
        fail(where, "missing required block");
    const json &g = root.at("geometry");
    check_keys(g, where, {"wavelength", "beam_waist_w0", "link_length", "focal_length", "aperture_radius"});
    ChannelGeometry geo;
    geo.wavelength = number(g, where, "wavelength", geo.wavelength);
    geo.beam_waist_w0 = number(g, where, "beam_waist_w0", geo.beam_waist_w0);
    geo.link_length = number(g, where, "link_length", geo.link_length);
    geo.focal_length = number(g, where, "focal_length", geo.link_length);
    geo.aperture_radius = number(g, where, "aperture_radius", geo.aperture_radius);
    for (auto [key, value] : {std::pair{"wavelength", geo.wavelength}, std::pair{"beam_waist_w0", geo.beam_waist_w0},
                              std::pair{"link_length", geo.link_length}, std::pair{"focal_length", geo.focal_length},
                              std::pair{"aperture_radius", geo.aperture_radius}})
        require(value > 0.0, where + "/" + key, "must be positive");
    return geo;
}

TurbulenceParams parse_turbulence(const json &block, const std::string &where) {
    check_keys(block, where, {"cn2", "rytov_sq"});
    TurbulenceParams t;
    t.cn2 = optional_number(block, where, "cn2");
    t.rytov_sq = optional_number(block, where, "rytov_sq");
    require(t.cn2 || t.rytov_sq, where, "one of cn2 or rytov_sq is required");
    if (t.cn2)
        require(*t.cn2 >= 0.0, where + "/cn2", "must be non-negative");
    if (t.rytov_sq)
        require(*t.rytov_sq >= 0.0, where + "/rytov_sq", "must be non-negative");
    return t;
}

ScatteringParams parse_scattering(const json &block, const std::string &where) {
    check_keys(block, where, {"mode", "zeta0", "n0", "xi_divergence", "albedo", "optical_depth", "mean_sq_angle"});
    ScatteringParams s;
    const std::string mode = block.contains("mode") && block.at("mode").is_string() ? block.at("mode").get<std::string>()
                                                                                    : std::string("none");
    if (block.contains("mode") && !block.at("mode").is_string())
        fail(where + "/mode", "expected a string");

    auto only = [&](std::initializer_list<const char *> keys) {
        std::set<std::string> allowed(keys.begin(), keys.end());
        allowed.insert("mode");
        for (auto it = block.begin(); it != block.end(); ++it)
            if (!allowed.count(it.key()))
                fail(where + "/" + it.key(), "not used by scattering mode '" + mode + "'");
    };

    if (mode == "none") {
        s.mode = ScatteringMode::none;
        only({});
    } else if (mode == "microphysical") {
        s.mode = ScatteringMode::microphysical;
        only({"zeta0", "n0"});
        s.zeta0 = number(block, where, "zeta0", 0.0);
        s.n0 = number(block, where, "n0", 0.0);
        require(s.zeta0 > 0.0, where + "/zeta0", "must be positive");
        require(s.n0 >= 0.0, where + "/n0", "must be non-negative");
    } else if (mode == "phenomenological") {
        s.mode = ScatteringMode::phenomenological;
        only({"xi_divergence"});
        s.xi_divergence = number(block, where, "xi_divergence", 0.0);
        require(s.xi_divergence >= 0.0, where + "/xi_divergence", "must be non-negative");
    } else if (mode == "transport") {
        s.mode = ScatteringMode::transport;
        only({"albedo", "optical_depth", "mean_sq_angle"});
        s.albedo = number(block, where, "albedo", 0.0);
        s.optical_depth = number(block, where, "optical_depth", 0.0);
        s.mean_sq_angle = number(block, where, "mean_sq_angle", 0.0);
        require(s.albedo >= 0.0 && s.albedo <= 1.0, where + "/albedo", "must lie in [0, 1]");
        require(s.optical_depth >= 0.0, where + "/optical_depth", "must be non-negative");
        require(s.mean_sq_angle >= 0.0, where + "/mean_sq_angle", "must be non-negative");
    } else {
        fail(where + "/mode", "unknown scattering mode '" + mode +
                                  "' (expected none, microphysical, phenomenological or transport)");
    }
    return s;
}

ExtinctionSpec parse_extinction(const json &block, const std::string &where) {
    check_keys(block, where, {"molecular", "rain_rate", "rain_coefficient"});
    ExtinctionSpec e;
    e.molecular = number(block, where, "molecular", 1.0);
    e.rain_rate = optional_number(block, where, "rain_rate");
    e.rain_coefficient = number(block, where, "rain_coefficient", ExtinctionSpec::kDefaultRainCoefficient);
    require(e.molecular > 0.0 && e.molecular <= 1.0, where + "/molecular", "must lie in (0, 1]");
    if (e.rain_rate)
        require(*e.rain_rate >= 0.0, where + "/rain_rate", "must be non-negative");
    require(e.rain_coefficient >= 0.0, where + "/rain_coefficient", "must be non-negative");
    return e;
}

ChannelConfig parse_channel(const json &obj, const std::string &where, const std::string &name) {
    ChannelConfig ch;
    ch.name = name;
    if (!obj.contains("turbulence"))
        fail(where + "/turbulence", "missing required block");
    ch.turbulence = parse_turbulence(obj.at("turbulence"), where + "/turbulence");
    if (obj.contains("scattering"))
        ch.scattering = parse_scattering(obj.at("scattering"), where + "/scattering");
    if (obj.contains("extinction"))
        ch.extinction = parse_extinction(obj.at("extinction"), where + "/extinction");
    return ch;
}

SamplingConfig parse_sampling(const json &root) {
    SamplingConfig s;
    if (!root.contains("sampling"))
        return s;
    const std::string where = "/sampling";
    const json &b = root.at("sampling");
    check_keys(b, where, {"n", "seed", "grid_size", "bandwidth", "threads"});
    s.n = unsigned_integer(b, where, "n", s.n);
    s.seed = unsigned_integer(b, where, "seed", s.seed);
    s.grid_size = unsigned_integer(b, where, "grid_size", s.grid_size);
    s.bandwidth = optional_number(b, where, "bandwidth");
    s.threads = static_cast<unsigned>(unsigned_integer(b, where, "threads", s.threads));
    require(s.n >= kMinDensitySamples, where + "/n", "must be at least 100");
    require(s.grid_size >= 2, where + "/grid_size", "must be at least 2");
    if (s.bandwidth)
        require(*s.bandwidth > 0.0, where + "/bandwidth", "must be positive");
    return s;
}

QuantumConfig parse_quantum(const json &root) {
    QuantumConfig q;
    q.thresholds = linspace(0.0, 0.9, 91);
    q.xi_grid = linspace(0.0, 2.0, 81);
    q.displacement_grid = linspace(0.0, 80.0, 321);
    if (!root.contains("quantum"))
        return q;
    const std::string where = "/quantum";
    const json &b = root.at("quantum");
    check_keys(b, where, {"input_db", "eta_opt", "eta_det", "eta_min", "thresholds", "xi_grid", "displacement_grid"});
    q.input_db = number(b, where, "input_db", q.input_db);
    q.eta_opt = number(b, where, "eta_opt", q.eta_opt);
    q.eta_det = number(b, where, "eta_det", q.eta_det);
    q.eta_min = number(b, where, "eta_min", q.eta_min);
    q.thresholds = grid(b, where, "thresholds", q.thresholds);
    q.xi_grid = grid(b, where, "xi_grid", q.xi_grid);
    q.displacement_grid = grid(b, where, "displacement_grid", q.displacement_grid);
    require(q.input_db < 0.0, where + "/input_db", "must be negative (squeezed input)");
    require(q.eta_opt > 0.0 && q.eta_opt <= 1.0, where + "/eta_opt", "must lie in (0, 1]");
    require(q.eta_det > 0.0 && q.eta_det <= 1.0, where + "/eta_det", "must lie in (0, 1]");
    require(q.eta_min >= 0.0 && q.eta_min < 1.0, where + "/eta_min", "must lie in [0, 1)");
    require(q.thresholds.front() >= 0.0 && q.thresholds.back() < 1.0, where + "/thresholds", "must lie in [0, 1)");
    require(q.xi_grid.front() >= 0.0 && q.xi_grid.back() <= 2.0, where + "/xi_grid", "must lie in [0, 2]");
    require(q.displacement_grid.front() >= 0.0, where + "/displacement_grid", "must be non-negative");
    return q;
}

FitConfig parse_fit(const json &root) {
    FitConfig f;
    if (!root.contains("fit"))
        return f;
    const std::string where = "/fit";
    const json &b = root.at("fit");
    check_keys(b, where, {"budget", "samples_per_eval", "bins", "rytov_sq", "xi_divergence", "chi_ext"});
    f.budget = unsigned_integer(b, where, "budget", f.budget);
    f.samples_per_eval = unsigned_integer(b, where, "samples_per_eval", f.samples_per_eval);
    f.bins = unsigned_integer(b, where, "bins", f.bins);
    auto range = [&](const char *key, double &lo, double &hi) {
        if (!b.contains(key))
            return;
        const json &r = b.at(key);
        const std::string here = where + "/" + key;
        if (!r.is_array() || r.size() != 2 || !r[0].is_number() || !r[1].is_number())
            fail(here, "expected [lo, hi]");
        lo = r[0].get<double>();
        hi = r[1].get<double>();
    };
    range("rytov_sq", f.bounds.rytov_lo, f.bounds.rytov_hi);
    range("xi_divergence", f.bounds.xi_lo, f.bounds.xi_hi);
    range("chi_ext", f.bounds.chi_lo, f.bounds.chi_hi);
    require(f.budget >= 1, where + "/budget", "must be at least 1");
    require(f.samples_per_eval >= 1000, where + "/samples_per_eval", "must be at least 1000");
    require(f.bins >= 2, where + "/bins", "must be at least 2");
    try {
        f.bounds.validate();
    } catch (const std::exception &e) {
        fail(where, e.what());
    }
    return f;
}

} // namespace

RunConfig parse_config(const std::string &json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error &e) {
        throw ConfigError(std::string("/: malformed JSON: ") + e.what());
    }
    check_keys(root, "", {"geometry", "turbulence", "scattering", "extinction", "sampling", "quantum", "fit", "channels"});

    RunConfig cfg;
    cfg.source_text = json_text;
    cfg.geometry = parse_geometry(root);
    cfg.sampling = parse_sampling(root);
    cfg.quantum = parse_quantum(root);
    cfg.fit = parse_fit(root);

    if (root.contains("channels")) {
        const json &list = root.at("channels");
        if (!list.is_array() || list.empty())
            fail("/channels", "expected a non-empty array");
        for (const char *key : {"turbulence", "scattering", "extinction"})
            if (root.contains(key))
                fail(std::string("/") + key, "must be given per channel when 'channels' is present");
        std::set<std::string> names;
        for (std::size_t i = 0; i < list.size(); ++i) {
            const std::string where = "/channels/" + std::to_string(i);
            const json &entry = list[i];
            check_keys(entry, where, {"name", "turbulence", "scattering", "extinction"});
            if (!entry.contains("name") || !entry.at("name").is_string())
                fail(where + "/name", "expected a string");
            const std::string name = entry.at("name").get<std::string>();
            if (name.empty() || name.find_first_of("/\\ ,") != std::string::npos)
                fail(where + "/name", "must be non-empty without spaces, commas or slashes");
            if (!names.insert(name).second)
                fail(where + "/name", "duplicate channel name '" + name + "'");
            cfg.channels.push_back(parse_channel(entry, where, name));
        }
        cfg.named_channels = true;
    } else {
        cfg.channels.push_back(parse_channel(root, "", "channel"));
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError(path.string() + ": cannot open config file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

} // namespace atmochan::cli
