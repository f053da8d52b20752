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

#include "atmochan/pdt_engine.hpp"

#include "atmochan/errors.hpp"
#include "atmochan/numerics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

namespace atmochan {

namespace {

unsigned resolve_threads(unsigned requested, std::size_t chunks) {
    unsigned threads = requested == 0 ? std::thread::hardware_concurrency() : requested;
    threads = std::max(1u, threads);
    return static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, chunks)));
}

void fill_chunk(const MvnSampler &sampler, const ChannelGeometry &geometry, double chi_ext, std::uint64_t seed,
                std::size_t chunk, std::span<double> out) {
    RandomSource rng(seed, chunk);
    Vector4 z;
    for (double &eta : out) {
        for (int k = 0; k < 4; ++k)
            z(k) = rng.normal();
        const double phi = 0.5 * std::numbers::pi * rng.uniform();
        const Vector4 v = sampler.transform(z);
        const BeamSample sample{v(0), v(1), v(2), v(3), phi};
        eta = std::clamp(chi_ext * transmittance(sample, geometry), 0.0, 1.0);
    }
}

} // namespace

TransmittanceEnsemble sample_ensemble(const ChannelStatistics &stats, const ChannelGeometry &geometry,
                                      std::size_t n, std::uint64_t seed, const SamplingOptions &options) {
    if (n == 0)
        throw DomainError("sample_ensemble: n must be at least 1");
    geometry.validate();
    if (!(stats.chi_ext > 0.0) || stats.chi_ext > 1.0)
        throw DomainError("sample_ensemble: chi_ext must lie in (0, 1]");

    const MvnSampler sampler(stats.mu, stats.sigma);

    TransmittanceEnsemble ensemble;
    ensemble.seed = seed;
    ensemble.samples.resize(n);

    const std::size_t chunks = (n + kSampleChunkSize - 1) / kSampleChunkSize;
    const unsigned threads = resolve_threads(options.threads, chunks);

    auto chunk_span = [&](std::size_t c) {
        const std::size_t begin = c * kSampleChunkSize;
        const std::size_t end = std::min(n, begin + kSampleChunkSize);
        return std::span<double>(ensemble.samples.data() + begin, end - begin);
    };

    if (threads == 1) {
        for (std::size_t c = 0; c < chunks; ++c)
            fill_chunk(sampler, geometry, stats.chi_ext, seed, c, chunk_span(c));
        return ensemble;
    }

    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::size_t error_chunk = chunks;
    std::exception_ptr error;
    {
        std::vector<std::jthread> workers;
        workers.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) {
            workers.emplace_back([&] {
                for (std::size_t c = next++; c < chunks; c = next++) {
                    try {
                        fill_chunk(sampler, geometry, stats.chi_ext, seed, c, chunk_span(c));
                    } catch (...) {
                        // report the failure of the lowest chunk so the error is deterministic
                        std::lock_guard lock(error_mutex);
                        if (c < error_chunk) {
                            error_chunk = c;
                            error = std::current_exception();
                        }
                    }
                }
            });
        }
    }
    if (error)
        std::rethrow_exception(error);
    return ensemble;
}

MomentEstimate estimate_moment(std::span<const double> samples, const std::function<double(double)> &f) {
    if (samples.empty())
        throw DomainError("estimate_moment: empty sample set");
    // two passes: the one-pass sum of squares loses everything to
    // cancellation on narrow ensembles
    double sum = 0.0;
    for (double eta : samples)
        sum += f(eta);
    const double n = static_cast<double>(samples.size());
    MomentEstimate out;
    out.value = sum / n;
    if (samples.size() > 1) {
        double ss = 0.0;
        for (double eta : samples) {
            const double d = f(eta) - out.value;
            ss += d * d;
        }
        out.std_error = std::sqrt(ss / (n - 1.0) / n);
    }
    return out;
}

double sample_skewness(std::span<const double> samples) {
    if (samples.size() < 3)
        throw DomainError("sample_skewness: need at least 3 samples");
    const double n = static_cast<double>(samples.size());
    double mean = 0.0;
    for (double x : samples)
        mean += x;
    mean /= n;
    double m2 = 0.0, m3 = 0.0;
    for (double x : samples) {
        const double d = x - mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= n;
    m3 /= n;
    if (m2 == 0.0)
        return 0.0;
    return m3 / std::pow(m2, 1.5);
}

PostselectedMoments postselected_moments(std::span<const double> samples, double eta_min) {
    if (!(eta_min >= 0.0) || eta_min >= 1.0)
        throw DomainError("postselected_moments: eta_min must lie in [0, 1)");
    if (samples.empty())
        throw DomainError("postselected_moments: empty sample set");

    double sum = 0.0, sum_sqrt = 0.0, sum_sq = 0.0;
    std::size_t kept = 0;
    for (double eta : samples) {
        if (eta >= eta_min) {
            sum += eta;
            sum_sqrt += std::sqrt(eta);
            sum_sq += eta * eta;
            ++kept;
        }
    }
    if (kept == 0) {
        std::ostringstream msg;
        msg << "postselection at eta_min = " << eta_min << " keeps no samples";
        throw EmptySelectionError(msg.str());
    }
    const double k = static_cast<double>(kept);
    PostselectedMoments out;
    out.kept = kept;
    out.mean_eta = sum / k;
    out.mean_sqrt_eta = sum_sqrt / k;
    out.fraction_kept = k / static_cast<double>(samples.size());
    if (kept > 1)
        out.sem_eta = std::sqrt(std::max(0.0, (sum_sq - k * out.mean_eta * out.mean_eta) / (k - 1.0)) / k);
    return out;
}

PostselectionTable::PostselectionTable(std::span<const double> samples)
    : sorted_(samples.begin(), samples.end()) {
    if (sorted_.empty())
        throw DomainError("PostselectionTable: empty sample set");
    std::sort(sorted_.begin(), sorted_.end());
    const std::size_t n = sorted_.size();
    tail_eta_.assign(n + 1, 0.0);
    tail_sqrt_eta_.assign(n + 1, 0.0);
    tail_eta_sq_.assign(n + 1, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        tail_eta_[i] = tail_eta_[i + 1] + sorted_[i];
        tail_sqrt_eta_[i] = tail_sqrt_eta_[i + 1] + std::sqrt(sorted_[i]);
        tail_eta_sq_[i] = tail_eta_sq_[i + 1] + sorted_[i] * sorted_[i];
    }
}

PostselectedMoments PostselectionTable::at(double eta_min) const {
    if (!(eta_min >= 0.0) || eta_min >= 1.0)
        throw DomainError("PostselectionTable::at: eta_min must lie in [0, 1)");
    const auto first = std::lower_bound(sorted_.begin(), sorted_.end(), eta_min);
    const std::size_t idx = static_cast<std::size_t>(first - sorted_.begin());
    const std::size_t kept = sorted_.size() - idx;
    if (kept == 0) {
        std::ostringstream msg;
        msg << "postselection at eta_min = " << eta_min << " keeps no samples";
        throw EmptySelectionError(msg.str());
    }
    const double k = static_cast<double>(kept);
    PostselectedMoments out;
    out.kept = kept;
    out.mean_eta = tail_eta_[idx] / k;
    out.mean_sqrt_eta = tail_sqrt_eta_[idx] / k;
    out.fraction_kept = k / static_cast<double>(sorted_.size());
    if (kept > 1)
        out.sem_eta = std::sqrt(std::max(0.0, (tail_eta_sq_[idx] - k * out.mean_eta * out.mean_eta) / (k - 1.0)) / k);
    return out;
}

Histogram Histogram::uniform(std::size_t bins) {
    if (bins == 0)
        throw DomainError("Histogram::uniform: need at least one bin");
    Histogram h;
    h.edges.resize(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i)
        h.edges[i] = static_cast<double>(i) / static_cast<double>(bins);
    h.counts.assign(bins, 0.0);
    return h;
}

Histogram Histogram::from_samples(std::span<const double> samples, std::size_t bins) {
    Histogram h = uniform(bins);
    for (double eta : samples)
        h.add(eta);
    return h;
}

double Histogram::total() const noexcept {
    double sum = 0.0;
    for (double c : counts)
        sum += c;
    return sum;
}

std::size_t Histogram::bin_of(double eta) const {
    if (edges.size() < 2 || !(eta >= edges.front()) || !(eta <= edges.back()))
        throw DomainError("Histogram: value outside the bin range");
    const auto it = std::upper_bound(edges.begin(), edges.end(), eta);
    const std::size_t idx = static_cast<std::size_t>(it - edges.begin());
    return std::min(idx - 1, counts.size() - 1);
}

void Histogram::add(double eta, double weight) {
    counts[bin_of(eta)] += weight;
}

void Histogram::validate() const {
    if (edges.size() < 2 || counts.size() + 1 != edges.size())
        throw DomainError("Histogram: edges must have exactly one more entry than counts");
    if (edges.front() < 0.0 || edges.back() > 1.0)
        throw DomainError("Histogram: bin edges must lie within [0, 1]");
    for (std::size_t i = 1; i < edges.size(); ++i)
        if (!(edges[i] > edges[i - 1]))
            throw DomainError("Histogram: bin edges must be strictly increasing");
    for (double c : counts)
        if (!std::isfinite(c) || c < 0.0)
            throw DomainError("Histogram: counts must be finite and non-negative");
}

Chi2Result chi2_test(std::span<const double> ensemble, const Histogram &measured) {
    measured.validate();
    const double total = measured.total();
    if (!(total > 0.0))
        throw DomainError("chi2: measured histogram is empty");

    std::vector<double> model(measured.bins(), 0.0);
    double inside = 0.0;
    for (double eta : ensemble) {
        if (eta < measured.edges.front() || eta > measured.edges.back())
            continue;
        model[measured.bin_of(eta)] += 1.0;
        inside += 1.0;
    }
    if (!(inside > 0.0))
        throw DomainError("chi2: no ensemble samples fall inside the histogram range");

    // group adjacent bins left to right until each expected count reaches the
    // Pearson threshold; a short right tail joins the last full group
    std::vector<double> expected_groups;
    std::vector<double> observed_groups;
    double e_acc = 0.0, o_acc = 0.0;
    for (std::size_t i = 0; i < measured.bins(); ++i) {
        e_acc += model[i] / inside * total;
        o_acc += measured.counts[i];
        if (e_acc >= kMinExpectedCount) {
            expected_groups.push_back(e_acc);
            observed_groups.push_back(o_acc);
            e_acc = o_acc = 0.0;
        }
    }
    if (e_acc > 0.0 || o_acc > 0.0) {
        if (expected_groups.empty()) {
            expected_groups.push_back(e_acc);
            observed_groups.push_back(o_acc);
        } else {
            expected_groups.back() += e_acc;
            observed_groups.back() += o_acc;
        }
    }

    Chi2Result out;
    out.groups = expected_groups.size();
    out.dof = out.groups > 0 ? out.groups - 1 : 0;
    for (std::size_t g = 0; g < expected_groups.size(); ++g) {
        const double d = observed_groups[g] - expected_groups[g];
        out.statistic += d * d / expected_groups[g];
    }
    return out;
}

ChannelStatistics statistics_from_triplet(const ChannelGeometry &geometry, double rytov_sq, double xi_divergence,
                                          double chi_ext) {
    TurbulenceParams turbulence;
    turbulence.rytov_sq = rytov_sq;
    ScatteringParams scattering;
    scattering.mode = ScatteringMode::phenomenological;
    scattering.xi_divergence = xi_divergence;
    ExtinctionSpec extinction;
    extinction.molecular = chi_ext;
    return assemble_statistics(geometry, turbulence, scattering, extinction);
}

} // namespace atmochan
