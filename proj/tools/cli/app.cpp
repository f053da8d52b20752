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

#include "app.hpp"

#include "config.hpp"
#include "csv_io.hpp"
#include "workflows.hpp"

#include "atmochan/errors.hpp"

#include <CLI11.hpp>

#include <functional>
#include <ostream>

namespace atmochan::cli {

int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
    CLI::App app{"atmochan: transmittance statistics of atmospheric quantum channels"};
    app.require_subcommand(1);

    std::string config_path;
    WorkflowOptions options;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    std::string out_dir = ".";
    std::string measured;

    using Workflow = std::function<void(const RunConfig &, const WorkflowOptions &)>;
    Workflow selected;

    auto add = [&](const char *name, const char *help, Workflow fn, bool needs_measured) {
        CLI::App *sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "run configuration (JSON)")->required();
        sub->add_option("--out-dir", out_dir, "output directory (created if missing)");
        sub->add_option("--seed", seed, "overrides sampling.seed");
        sub->add_option("--threads", threads, "worker threads (0: all cores)");
        if (needs_measured)
            sub->add_option("--measured", measured, "measured trace CSV")->required();
        sub->callback([&selected, fn] { selected = fn; });
        return sub;
    };
    CLI::App *sim = add("simulate-pdt", "sample the transmittance distribution", run_simulate_pdt, false);
    CLI::App *fit = add("fit", "fit (rytov_sq, xi_divergence, chi_ext) to a measured trace", run_fit, true);
    CLI::App *sqz = add("squeezing", "squeezing after postselection vs threshold", run_squeezing, false);
    CLI::App *ent = add("entanglement", "PPT entanglement map of a TMSV state", run_entanglement, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError &e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    options.out_dir = out_dir;
    options.measured = measured;
    for (CLI::App *sub : {sim, fit, sqz, ent}) {
        if (!sub->parsed())
            continue;
        if (sub->count("--seed"))
            options.seed = seed;
        if (sub->count("--threads"))
            options.threads = threads;
    }

    try {
        const RunConfig config = load_config(config_path);
        selected(config, options);
    } catch (const ConfigError &e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DomainError &e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const IngestionError &e) {
        err << "ingestion error: " << e.what() << '\n';
        return kExitIngestion;
    } catch (const BudgetExhaustedError &e) {
        err << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const StatisticsError &e) {
        err << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitOk;
}

} // namespace atmochan::cli
