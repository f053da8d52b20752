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

#include "workflows.hpp"

#include "csv_io.hpp"

#include "atmochan/errors.hpp"
#include "atmochan/pdt_engine.hpp"
#include "atmochan/quantum_layer.hpp"

#include <cmath>

namespace atmochan::cli {

namespace {

struct Context {
    Provenance provenance;
    SamplingOptions sampling;
    std::filesystem::path out_dir;
};

Context make_context(const RunConfig &config, const WorkflowOptions &options) {
    Context ctx;
    ctx.provenance.config_hash = fnv1a64(config.source_text);
    ctx.provenance.seed = options.seed.value_or(config.sampling.seed);
    ctx.sampling.threads = options.threads.value_or(config.sampling.threads);
    ctx.out_dir = options.out_dir;
    std::filesystem::create_directories(ctx.out_dir);
    return ctx;
}

std::filesystem::path output_path(const Context &ctx, const RunConfig &config, const std::string &stem,
                                  const ChannelConfig &channel) {
    return ctx.out_dir / (config.named_channels ? stem + "_" + channel.name + ".csv" : stem + ".csv");
}

ChannelStatistics channel_statistics(const RunConfig &config, const ChannelConfig &channel) {
    return assemble_statistics(config.geometry, channel.turbulence, channel.scattering, channel.extinction);
}

TransmittanceEnsemble channel_ensemble(const RunConfig &config, const ChannelConfig &channel, const Context &ctx) {
    return sample_ensemble(channel_statistics(config, channel), config.geometry, config.sampling.n,
                           ctx.provenance.seed, ctx.sampling);
}

void write_density(const std::filesystem::path &path, const DensityEstimate &density, const Provenance &provenance) {
    CsvWriter out(path, {"eta", "density"}, provenance);
    for (std::size_t i = 0; i < density.grid.size(); ++i)
        out.row({density.grid[i], density.density[i]});
}

} // namespace

void run_simulate_pdt(const RunConfig &config, const WorkflowOptions &options) {
    const Context ctx = make_context(config, options);
    for (const auto &channel : config.channels) {
        const ChannelStatistics stats = channel_statistics(config, channel);
        const TransmittanceEnsemble ensemble =
            sample_ensemble(stats, config.geometry, config.sampling.n, ctx.provenance.seed, ctx.sampling);

        {
            CsvWriter out(output_path(ctx, config, "samples", channel), {"index", "transmittance"}, ctx.provenance);
            for (std::size_t i = 0; i < ensemble.size(); ++i)
                out.row_text({std::to_string(i), format_double(ensemble.samples[i])});
        }

        const DensityEstimate density = estimate_density(ensemble, config.sampling.grid_size, config.sampling.bandwidth);
        write_density(output_path(ctx, config, "density", channel), density, ctx.provenance);

        const MomentEstimate mean = estimate_moment(ensemble, [](double e) { return e; });
        const MomentEstimate mean_sqrt = estimate_moment(ensemble, [](double e) { return std::sqrt(e); });
        CsvWriter out(output_path(ctx, config, "summary", channel), {"quantity", "value"}, ctx.provenance);
        for (const auto &w : stats.warnings)
            out.comment("warning: " + w);
        auto put = [&](const char *name, double v) { out.row_text({name, format_double(v)}); };
        put("n", static_cast<double>(ensemble.size()));
        put("mean_eta", mean.value);
        put("mean_eta_sem", mean.std_error);
        put("mean_sqrt_eta", mean_sqrt.value);
        put("skewness", density.degenerate ? 0.0 : sample_skewness(ensemble.view()));
        put("rytov_sq", stats.rytov_sq);
        put("xi_divergence", stats.xi_divergence);
        put("chi_ext", stats.chi_ext);
        put("density_mode", density.mode());
        put("bandwidth", density.bandwidth);
        put("degenerate", density.degenerate ? 1.0 : 0.0);
    }
}

void run_fit(const RunConfig &config, const WorkflowOptions &options) {
    const Context ctx = make_context(config, options);
    const MeasuredTrace trace = read_measured_trace(options.measured);
    if (trace.transmittance.size() < kMinDensitySamples)
        throw IngestionError(options.measured.string() + ": at least " + std::to_string(kMinDensitySamples) +
                             " usable rows are required, found " + std::to_string(trace.transmittance.size()));

    {
        CsvWriter report(ctx.out_dir / "ingestion_report.csv", {"line", "reason"}, ctx.provenance);
        report.comment("rows=" + std::to_string(trace.total_rows) + " rejected=" + std::to_string(trace.rejected.size()) +
                       " rejected_fraction=" + format_double(trace.rejected_fraction()));
        for (const auto &r : trace.rejected)
            report.row_text({std::to_string(r.line), "\"" + r.reason + "\""});
    }

    const Histogram measured = Histogram::from_samples(trace.transmittance, config.fit.bins);
    FitOptions fit_options;
    fit_options.budget = config.fit.budget;
    fit_options.samples_per_eval = config.fit.samples_per_eval;
    fit_options.sampling = ctx.sampling;
    const FitResult fit = fit_channel(measured, config.geometry, config.fit.bounds, ctx.provenance.seed, fit_options);

    {
        CsvWriter out(ctx.out_dir / "fit_result.csv", {"quantity", "value"}, ctx.provenance);
        auto put = [&](const char *name, double v) { out.row_text({name, format_double(v)}); };
        put("rytov_sq", fit.rytov_sq);
        put("xi_divergence", fit.xi_divergence);
        put("chi_ext", fit.chi_ext);
        put("chi2_statistic", fit.chi2_statistic);
        put("dof", static_cast<double>(fit.dof));
        put("n_eval", static_cast<double>(fit.n_eval));
        put("measured_rows", static_cast<double>(trace.transmittance.size()));
        put("rejected_rows", static_cast<double>(trace.rejected.size()));
        put("rejected_fraction", trace.rejected_fraction());
    }

    const ChannelStatistics model_stats =
        statistics_from_triplet(config.geometry, fit.rytov_sq, fit.xi_divergence, fit.chi_ext);
    const TransmittanceEnsemble model =
        sample_ensemble(model_stats, config.geometry, config.sampling.n, ctx.provenance.seed, ctx.sampling);
    const DensityEstimate measured_kde =
        estimate_density(trace.transmittance, config.sampling.grid_size, config.sampling.bandwidth);
    const DensityEstimate model_kde = estimate_density(model, config.sampling.grid_size, config.sampling.bandwidth);
    CsvWriter out(ctx.out_dir / "overlay.csv", {"eta", "measured_density", "model_density"}, ctx.provenance);
    for (std::size_t i = 0; i < measured_kde.grid.size(); ++i)
        out.row({measured_kde.grid[i], measured_kde.density[i], model_kde.density[i]});
}

void run_squeezing(const RunConfig &config, const WorkflowOptions &options) {
    const Context ctx = make_context(config, options);
    const QuantumConfig &q = config.quantum;
    for (const auto &channel : config.channels) {
        const TransmittanceEnsemble ensemble = channel_ensemble(config, channel, ctx);
        const SqueezingCurve curve =
            squeezing_vs_threshold(q.input_db, ensemble.view(), q.thresholds, q.deterministic_factor());
        CsvWriter out(output_path(ctx, config, "squeezing", channel), {"eta_min", "output_db", "fraction_kept"},
                      ctx.provenance);
        for (const auto &p : curve.points)
            out.row({p.eta_min, p.output_db, p.fraction_kept});
        if (curve.truncated)
            out.comment("notice: postselection empty for eta_min >= " + format_double(curve.first_empty_threshold) +
                        "; curve truncated");
    }
}

void run_entanglement(const RunConfig &config, const WorkflowOptions &options) {
    const Context ctx = make_context(config, options);
    const QuantumConfig &q = config.quantum;
    for (const auto &channel : config.channels) {
        const TransmittanceEnsemble ensemble = channel_ensemble(config, channel, ctx);
        const ChannelMoments moments = channel_moments(ensemble, q.eta_min, q.deterministic_factor());
        const EntanglementRegion region = entanglement_region(moments, q.xi_grid, q.displacement_grid);
        {
            CsvWriter out(output_path(ctx, config, "wgrid", channel), {"xi", "displacement", "w_value"},
                          ctx.provenance);
            for (std::size_t i = 0; i < region.xi_grid.size(); ++i)
                for (std::size_t j = 0; j < region.displacement_grid.size(); ++j)
                    out.row({region.xi_grid[i], region.displacement_grid[j], region.w(i, j)});
        }
        CsvWriter out(output_path(ctx, config, "contour", channel), {"xi", "displacement"}, ctx.provenance);
        if (region.contour.empty())
            out.comment("notice: W does not change sign on the grid; no contour");
        for (const auto &[xi, d] : region.contour)
            out.row({xi, d});
    }
}

} // namespace atmochan::cli
