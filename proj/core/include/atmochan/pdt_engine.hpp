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

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace atmochan {

// Samples are drawn in fixed-size chunks; chunk c uses RandomSource(seed, c).
// Chunk layout never depends on the number of worker threads.
inline constexpr std::size_t kSampleChunkSize = 16384;

struct SamplingOptions {
    unsigned threads = 0; // 0: hardware concurrency
};

struct TransmittanceEnsemble {
    std::vector<double> samples; // chi_ext * eta, each in [0, 1]
    std::uint64_t seed = 0;
    bool chi_ext_applied = true;

    std::size_t size() const noexcept { return samples.size(); }
    std::span<const double> view() const noexcept { return samples; }
};

TransmittanceEnsemble sample_ensemble(const ChannelStatistics &stats, const ChannelGeometry &geometry,
                                      std::size_t n, std::uint64_t seed, const SamplingOptions &options = {});

struct MomentEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

MomentEstimate estimate_moment(std::span<const double> samples, const std::function<double(double)> &f);
inline MomentEstimate estimate_moment(const TransmittanceEnsemble &ensemble, const std::function<double(double)> &f) {
    return estimate_moment(ensemble.view(), f);
}

// Standardized third central moment of the samples.
double sample_skewness(std::span<const double> samples);

struct PostselectedMoments {
    double mean_eta = 0.0;
    double mean_sqrt_eta = 0.0;
    double fraction_kept = 0.0;
    std::size_t kept = 0;
    double sem_eta = 0.0; // standard error of mean_eta
};

// Moments over the samples with eta >= eta_min. Throws EmptySelectionError
// when nothing survives.
PostselectedMoments postselected_moments(std::span<const double> samples, double eta_min);
inline PostselectedMoments postselected_moments(const TransmittanceEnsemble &ensemble, double eta_min) {
    return postselected_moments(ensemble.view(), eta_min);
}

// Sorted copy with suffix sums; answers many thresholds in O(log n) each.
class PostselectionTable {
public:
    explicit PostselectionTable(std::span<const double> samples);

    PostselectedMoments at(double eta_min) const;
    double max_sample() const noexcept { return sorted_.empty() ? 0.0 : sorted_.back(); }

private:
    std::vector<double> sorted_;
    std::vector<double> tail_eta_;      // sum of eta over sorted_[i..]
    std::vector<double> tail_sqrt_eta_; // sum of sqrt(eta) over sorted_[i..]
    std::vector<double> tail_eta_sq_;   // sum of eta^2 over sorted_[i..]
};

// ---------------------------------------------------------------------------
// Histograms and the Pearson chi-square statistic
// ---------------------------------------------------------------------------

inline constexpr std::size_t kDefaultHistogramBins = 40;
inline constexpr double kMinExpectedCount = 5.0;

struct Histogram {
    std::vector<double> edges;  // size bins + 1, increasing, within [0, 1]
    std::vector<double> counts; // size bins

    static Histogram uniform(std::size_t bins = kDefaultHistogramBins);
    static Histogram from_samples(std::span<const double> samples, std::size_t bins = kDefaultHistogramBins);

    std::size_t bins() const noexcept { return counts.size(); }
    double total() const noexcept;
    // Index of the bin containing eta (the last bin is closed on the right).
    std::size_t bin_of(double eta) const;
    void add(double eta, double weight = 1.0);
    void validate() const;
};

struct Chi2Result {
    double statistic = 0.0;
    std::size_t groups = 0; // bins after merging
    std::size_t dof = 0;    // groups - 1
};

// Expected counts come from the ensemble's bin proportions scaled to the
// measured total; adjacent bins are merged until every expected count is at
// least kMinExpectedCount.
Chi2Result chi2_test(std::span<const double> ensemble, const Histogram &measured);
inline double chi2_statistic(const TransmittanceEnsemble &ensemble, const Histogram &measured) {
    return chi2_test(ensemble.view(), measured).statistic;
}

// ---------------------------------------------------------------------------
// Kernel density estimate on [0, 1]
// ---------------------------------------------------------------------------

struct DensityEstimate {
    std::vector<double> grid;
    std::vector<double> density;
    double bandwidth = 0.0;
    bool degenerate = false;

    double integral() const; // trapezoidal over the grid
    double mode() const;
};

inline constexpr std::size_t kMinDensitySamples = 100;

// Gaussian-kernel KDE with reflection at 0 and 1. The default bandwidth is
// Silverman's rule, 0.9 min(sd, IQR/1.34) n^(-1/5). A zero-spread sample set
// yields a narrow spike and sets `degenerate`.
DensityEstimate estimate_density(std::span<const double> samples, std::size_t grid_size = 512,
                                 std::optional<double> bandwidth = std::nullopt);
inline DensityEstimate estimate_density(const TransmittanceEnsemble &ensemble, std::size_t grid_size = 512,
                                        std::optional<double> bandwidth = std::nullopt) {
    return estimate_density(ensemble.view(), grid_size, bandwidth);
}

// ---------------------------------------------------------------------------
// Fitting (rytov_sq, xi_divergence, chi_ext) to a measured histogram
// ---------------------------------------------------------------------------

struct ParameterBox {
    double rytov_lo = 0.05, rytov_hi = 6.0;
    double xi_lo = 0.0, xi_hi = 30.0;
    double chi_lo = 0.05, chi_hi = 1.0;

    void validate() const;
};

struct FitOptions {
    std::size_t budget = 500;               // objective evaluations
    std::size_t samples_per_eval = 100000;  // model ensemble size
    std::size_t grid_rytov = 7;
    std::size_t grid_xi = 7;
    SamplingOptions sampling;
};

struct FitResult {
    double rytov_sq = 0.0;
    double xi_divergence = 0.0;
    double chi_ext = 0.0;
    double chi2_statistic = 0.0;
    std::size_t dof = 0;
    std::size_t n_eval = 0;
};

// Coarse grid over (rytov_sq, xi) with chi_ext set by matching the mean,
// then Nelder-Mead over all three parameters. Every evaluation reuses the
// same seed so the objective is free of Monte Carlo jitter.
FitResult fit_channel(const Histogram &measured, const ChannelGeometry &geometry, const ParameterBox &bounds,
                      std::uint64_t seed, const FitOptions &options = {});

// Statistics for a channel given directly by its fitted triplet.
ChannelStatistics statistics_from_triplet(const ChannelGeometry &geometry, double rytov_sq, double xi_divergence,
                                          double chi_ext);

} // namespace atmochan
