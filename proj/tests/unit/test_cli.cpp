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

#include "cli/app.hpp"
#include "cli/config.hpp"
#include "cli/csv_io.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace atmochan::cli;
using Catch::Approx;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string &name) {
    const fs::path p = fs::temp_directory_path() / ("atmochan_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

json base_config() {
    return json::parse(R"({
      "geometry": {"wavelength": 780e-9, "beam_waist_w0": 0.02, "link_length": 1600,
                   "focal_length": 1600, "aperture_radius": 0.075},
      "turbulence": {"rytov_sq": 1.78},
      "scattering": {"mode": "phenomenological", "xi_divergence": 5},
      "extinction": {"molecular": 0.51},
      "sampling": {"n": 20000, "seed": 11, "grid_size": 128},
      "quantum": {"thresholds": {"start": 0, "stop": 0.6, "count": 31},
                  "xi_grid": {"start": 0, "stop": 2, "count": 11},
                  "displacement_grid": {"start": 0, "stop": 80, "count": 81}}
    })");
}

fs::path write_config(const fs::path &dir, const json &cfg) {
    const fs::path p = dir / "config.json";
    std::ofstream(p) << cfg.dump(2);
    return p;
}

struct Run {
    int code;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "atmochan");
    std::vector<const char *> argv;
    for (const auto &a : args)
        argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, err.str()};
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::map<std::string, double> summary(const fs::path &p) {
    const CsvTable t = read_csv(p);
    std::map<std::string, double> out;
    for (const auto &r : t.rows) {
        double v = 0.0;
        REQUIRE(parse_double(r[1], v));
        out[r[0]] = v;
    }
    return out;
}

std::string config_error(const json &cfg) {
    try {
        parse_config(cfg.dump());
    } catch (const ConfigError &e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST_CASE("config parsing applies defaults and grids", "[cli][config]") {
    const RunConfig c = parse_config(base_config().dump());
    CHECK(c.channels.size() == 1);
    CHECK_FALSE(c.named_channels);
    CHECK(c.channels[0].turbulence.rytov_sq == 1.78);
    CHECK(c.quantum.thresholds.size() == 31);
    CHECK(c.quantum.thresholds.back() == Approx(0.6));
    CHECK(c.quantum.input_db == -2.4);
    CHECK(c.quantum.deterministic_factor() == Approx(0.792));
    CHECK(c.fit.budget == 500);
}

TEST_CASE("config errors carry the location", "[cli][config]") {
    json c = base_config();
    c["geometry"]["aperture"] = 0.1;
    CHECK(config_error(c).find("/geometry/aperture") == 0);

    c = base_config();
    c["sampling"]["n"] = 10;
    CHECK(config_error(c).find("/sampling/n") == 0);

    c = base_config();
    c["scattering"] = {{"mode", "fog"}};
    CHECK(config_error(c).find("/scattering/mode") == 0);

    c = base_config();
    c["scattering"]["zeta0"] = 1e-6;
    CHECK(config_error(c).find("/scattering/zeta0") == 0);

    c = base_config();
    c["quantum"]["thresholds"] = {0.1, 0.05};
    CHECK(config_error(c).find("/quantum/thresholds") == 0);

    c = base_config();
    c["extinction"]["molecular"] = "high";
    CHECK(config_error(c).find("/extinction/molecular") == 0);

    c = base_config();
    c.erase("geometry");
    CHECK(config_error(c).find("/geometry") == 0);

    CHECK(config_error(json::parse("[1, 2]")).find(": expected an object") != std::string::npos);
    CHECK_THROWS_AS(parse_config("{ not json"), ConfigError);
}

TEST_CASE("multi-channel configs", "[cli][config]") {
    json c = base_config();
    json ch = {{"name", "a"}, {"turbulence", c["turbulence"]}};
    c.erase("turbulence");
    c.erase("scattering");
    c.erase("extinction");
    c["channels"] = {ch, ch};
    CHECK(config_error(c).find("/channels/1/name") == 0);
    c["channels"][1]["name"] = "b";
    const RunConfig rc = parse_config(c.dump());
    CHECK(rc.named_channels);
    CHECK(rc.channels.size() == 2);
    c["turbulence"] = {{"rytov_sq", 1.0}};
    CHECK(config_error(c).find("/turbulence") == 0);
}

TEST_CASE("CSV writer output round-trips through the reader", "[cli][csv]") {
    const fs::path dir = scratch("csv");
    const std::vector<double> values = {0.1, 1.0 / 3.0, 1e-300, 0.9999999999999999, 0.0};
    {
        CsvWriter w(dir / "x.csv", {"index", "transmittance"}, {0xabcdef, 42});
        for (std::size_t i = 0; i < values.size(); ++i)
            w.row({static_cast<double>(i), values[i]});
    }
    const CsvTable t = read_csv(dir / "x.csv");
    REQUIRE(t.comments.size() == 1);
    CHECK(t.comments[0] == "provenance: config_hash=0000000000abcdef seed=42");
    REQUIRE(t.rows.size() == values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        double v = -1.0;
        REQUIRE(parse_double(t.rows[i][1], v));
        CHECK(v == values[i]);
    }
    const MeasuredTrace m = read_measured_trace(dir / "x.csv");
    CHECK(m.transmittance == values);
}

TEST_CASE("measured trace ingestion rejects bad rows", "[cli][csv]") {
    const fs::path dir = scratch("ingest");
    {
        std::ofstream f(dir / "m.csv");
        f << "timestamp_s,transmittance\n";
        for (int i = 0; i < 99; ++i)
            f << i * 1e-3 << "," << 0.3 + 0.001 * i << "\n";
        f << "0.1,1.5\n";
        f << "0.2,abc\n";
    }
    const MeasuredTrace m = read_measured_trace(dir / "m.csv");
    CHECK(m.transmittance.size() == 99);
    REQUIRE(m.rejected.size() == 2);
    CHECK(m.rejected[0].line == 101);
    CHECK(m.rejected[1].line == 102);
    CHECK(m.timestamp_s.size() == 99);

    std::ofstream(dir / "empty.csv") << "transmittance\n";
    CHECK_THROWS_AS(read_measured_trace(dir / "empty.csv"), IngestionError);
    std::ofstream(dir / "nocol.csv") << "eta\n0.1\n";
    CHECK_THROWS_AS(read_measured_trace(dir / "nocol.csv"), IngestionError);
}

TEST_CASE("simulate-pdt writes samples, density and summary", "[cli][workflow]") {
    const fs::path dir = scratch("simulate");
    const fs::path cfg = write_config(dir, base_config());
    REQUIRE(run({"simulate-pdt", "--config", cfg.string(), "--out-dir", (dir / "out").string()}).code == 0);

    const CsvTable samples = read_csv(dir / "out" / "samples.csv");
    CHECK(samples.columns == std::vector<std::string>{"index", "transmittance"});
    CHECK(samples.rows.size() == 20000);
    CHECK(samples.comments.at(0).rfind("provenance: config_hash=", 0) == 0);
    CHECK(samples.comments.at(0).find("seed=11") != std::string::npos);

    const CsvTable density = read_csv(dir / "out" / "density.csv");
    CHECK(density.columns == std::vector<std::string>{"eta", "density"});
    CHECK(density.rows.size() == 128);

    const auto s = summary(dir / "out" / "summary.csv");
    CHECK(s.at("degenerate") == 0.0);
    CHECK(s.at("chi_ext") == 0.51);
    CHECK(s.at("mean_eta") > 0.0);
}

TEST_CASE("a channel without randomness is reported as degenerate", "[cli][workflow]") {
    const fs::path dir = scratch("degenerate");
    json c = base_config();
    c["turbulence"] = {{"rytov_sq", 0.0}};
    c["scattering"] = {{"mode", "none"}};
    const fs::path cfg = write_config(dir, c);
    REQUIRE(run({"simulate-pdt", "--config", cfg.string(), "--out-dir", dir.string()}).code == 0);
    CHECK(summary(dir / "summary.csv").at("degenerate") == 1.0);
}

TEST_CASE("outputs are byte-identical across reruns and thread counts", "[cli][workflow]") {
    const fs::path dir = scratch("determinism");
    json c = base_config();
    c["sampling"]["n"] = 40000;
    const fs::path cfg = write_config(dir, c);
    for (const char *wf : {"simulate-pdt", "squeezing", "entanglement"}) {
        REQUIRE(run({wf, "--config", cfg.string(), "--out-dir", (dir / "a").string(), "--threads", "1"}).code == 0);
        REQUIRE(run({wf, "--config", cfg.string(), "--out-dir", (dir / "b").string(), "--threads", "4"}).code == 0);
        REQUIRE(run({wf, "--config", cfg.string(), "--out-dir", (dir / "c").string(), "--threads", "1"}).code == 0);
    }
    std::size_t compared = 0;
    for (const auto &entry : fs::directory_iterator(dir / "a")) {
        const std::string a = slurp(entry.path());
        CHECK(a == slurp(dir / "b" / entry.path().filename()));
        CHECK(a == slurp(dir / "c" / entry.path().filename()));
        ++compared;
    }
    CHECK(compared == 6);
}

TEST_CASE("seed override is honoured and recorded", "[cli][workflow]") {
    const fs::path dir = scratch("seed");
    const fs::path cfg = write_config(dir, base_config());
    REQUIRE(run({"simulate-pdt", "--config", cfg.string(), "--out-dir", (dir / "a").string(), "--seed", "5"}).code == 0);
    REQUIRE(run({"simulate-pdt", "--config", cfg.string(), "--out-dir", (dir / "b").string()}).code == 0);
    CHECK(read_csv(dir / "a" / "samples.csv").comments.at(0).find("seed=5") != std::string::npos);
    CHECK(slurp(dir / "a" / "samples.csv") != slurp(dir / "b" / "samples.csv"));
}

TEST_CASE("exit codes", "[cli][workflow]") {
    const fs::path dir = scratch("exit");
    json bad = base_config();
    bad["geometry"]["bogus"] = 1;
    const fs::path bad_cfg = write_config(dir, bad);
    const Run r = run({"simulate-pdt", "--config", bad_cfg.string(), "--out-dir", dir.string()});
    CHECK(r.code == kExitConfig);
    CHECK(r.err.find("/geometry/bogus") != std::string::npos);

    CHECK(run({"simulate-pdt", "--config", (dir / "missing.json").string()}).code == kExitConfig);
    CHECK(run({"frobnicate"}).code == kExitUsage);

    const fs::path good = write_config(dir, base_config());
    std::ofstream(dir / "empty.csv") << "transmittance\n";
    CHECK(run({"fit", "--config", good.string(), "--measured", (dir / "empty.csv").string(), "--out-dir", dir.string()}).code ==
          kExitIngestion);

    json rain = base_config();
    rain["extinction"] = {{"molecular", 0.94}, {"rain_rate", 3.2}, {"rain_coefficient", 210.0}};
    const fs::path rain_cfg = dir / "rain.json";
    std::ofstream(rain_cfg) << rain.dump();
    CHECK(run({"simulate-pdt", "--config", rain_cfg.string(), "--out-dir", dir.string()}).code == kExitNumerical);

    json tight = base_config();
    tight["fit"] = {{"budget", 3}, {"samples_per_eval", 2000}};
    const fs::path tight_cfg = dir / "tight.json";
    std::ofstream(tight_cfg) << tight.dump();
    REQUIRE(run({"simulate-pdt", "--config", good.string(), "--out-dir", (dir / "trace").string()}).code == 0);
    CHECK(run({"fit", "--config", tight_cfg.string(), "--measured", (dir / "trace" / "samples.csv").string(), "--out-dir",
               dir.string()})
              .code == kExitNumerical);
}

TEST_CASE("fit tolerates a few bad rows and reports them", "[cli][workflow]") {
    const fs::path dir = scratch("fit");
    json c = base_config();
    c["sampling"]["n"] = 20000;
    c["fit"] = {{"budget", 60}, {"samples_per_eval", 5000}};
    const fs::path cfg = write_config(dir, c);
    REQUIRE(run({"simulate-pdt", "--config", cfg.string(), "--out-dir", (dir / "sim").string()}).code == 0);

    // corrupt 1% of the rows
    const CsvTable t = read_csv(dir / "sim" / "samples.csv");
    {
        std::ofstream f(dir / "measured.csv");
        f << "transmittance\n";
        for (std::size_t i = 0; i < t.rows.size(); ++i)
            f << (i % 100 == 0 ? (i % 200 == 0 ? "1.7" : "nan?") : t.rows[i][1]) << "\n";
    }
    json fit_cfg = c;
    fit_cfg["fit"]["budget"] = 500;
    const fs::path cfg2 = dir / "fit.json";
    std::ofstream(cfg2) << fit_cfg.dump();
    const Run r = run({"fit", "--config", cfg2.string(), "--measured", (dir / "measured.csv").string(), "--out-dir",
                       (dir / "out").string()});
    REQUIRE(r.code == 0);
    const auto res = summary(dir / "out" / "fit_result.csv");
    CHECK(res.at("rejected_fraction") == Approx(0.01));
    CHECK(res.at("rejected_rows") == 200);
    CHECK(read_csv(dir / "out" / "ingestion_report.csv").rows.size() == 200);
    const CsvTable overlay = read_csv(dir / "out" / "overlay.csv");
    CHECK(overlay.columns == std::vector<std::string>{"eta", "measured_density", "model_density"});
    CHECK(overlay.rows.size() == 128);
}

TEST_CASE("squeezing workflow", "[cli][workflow]") {
    const fs::path dir = scratch("squeezing");
    const fs::path cfg = write_config(dir, base_config());
    REQUIRE(run({"squeezing", "--config", cfg.string(), "--out-dir", dir.string()}).code == 0);
    const CsvTable t = read_csv(dir / "squeezing.csv");
    CHECK(t.columns == std::vector<std::string>{"eta_min", "output_db", "fraction_kept"});
    CHECK(t.rows.size() < 31);
    bool notice = false;
    for (const auto &c : t.comments)
        notice |= c.rfind("notice:", 0) == 0;
    CHECK(notice);

    // identity channel: flat at the input level
    json id = base_config();
    id["geometry"]["aperture_radius"] = 10.0;
    id["turbulence"] = {{"rytov_sq", 0.0}};
    id["scattering"] = {{"mode", "none"}};
    id["extinction"] = {{"molecular", 1.0}};
    id["quantum"]["eta_opt"] = 1.0;
    id["quantum"]["eta_det"] = 1.0;
    id["quantum"]["thresholds"] = {0.0, 0.5, 0.9};
    const fs::path id_cfg = dir / "id.json";
    std::ofstream(id_cfg) << id.dump();
    REQUIRE(run({"squeezing", "--config", id_cfg.string(), "--out-dir", (dir / "id").string()}).code == 0);
    const CsvTable flat = read_csv(dir / "id" / "squeezing.csv");
    REQUIRE(flat.rows.size() == 3);
    for (const auto &r : flat.rows) {
        double v = 0.0;
        REQUIRE(parse_double(r[1], v));
        CHECK(v == Approx(-2.4).epsilon(1e-12));
    }
}

TEST_CASE("entanglement workflow", "[cli][workflow]") {
    const fs::path dir = scratch("entanglement");
    const fs::path cfg = write_config(dir, base_config());
    REQUIRE(run({"entanglement", "--config", cfg.string(), "--out-dir", dir.string()}).code == 0);
    const CsvTable w = read_csv(dir / "wgrid.csv");
    CHECK(w.columns == std::vector<std::string>{"xi", "displacement", "w_value"});
    CHECK(w.rows.size() == 11 * 81);
    for (const auto &r : w.rows) {
        double xi = 0.0, value = 0.0;
        REQUIRE(parse_double(r[0], xi));
        REQUIRE(parse_double(r[2], value));
        if (xi == 0.0)
            CHECK(value >= 0.0);
    }
    const CsvTable contour = read_csv(dir / "contour.csv");
    CHECK(contour.columns == std::vector<std::string>{"xi", "displacement"});
    CHECK(contour.rows.size() > 5);

    json det = base_config();
    det["turbulence"] = {{"rytov_sq", 0.0}};
    det["scattering"] = {{"mode", "none"}};
    const fs::path det_cfg = dir / "det.json";
    std::ofstream(det_cfg) << det.dump();
    REQUIRE(run({"entanglement", "--config", det_cfg.string(), "--out-dir", (dir / "det").string()}).code == 0);
    const CsvTable none = read_csv(dir / "det" / "contour.csv");
    CHECK(none.rows.empty());
    CHECK(none.comments.size() == 2);
}
