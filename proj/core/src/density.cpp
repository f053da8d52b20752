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

#include "atmochan/errors.hpp"
#include "atmochan/pdt_engine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace atmochan {

namespace {

constexpr std::size_t kFineBins = 16384;
constexpr double kKernelCutoff = 8.0; // bandwidths

double quantile_sorted(const std::vector<double> &sorted, double p) {
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

// Kernel mass at x from a unit point at c, including its mirror images
// about 0 and 1.
double reflected_kernel(double x, double c, double h) {
    const double norm = 1.0 / (h * std::sqrt(2.0 * std::numbers::pi));
    auto k = [&](double d) {
        const double u = d / h;
        return std::abs(u) > kKernelCutoff ? 0.0 : std::exp(-0.5 * u * u);
    };
    return norm * (k(x - c) + k(x + c) + k(x - (2.0 - c)));
}

} // namespace

double DensityEstimate::integral() const {
    double sum = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i)
        sum += 0.5 * (density[i] + density[i - 1]) * (grid[i] - grid[i - 1]);
    return sum;
}

double DensityEstimate::mode() const {
    const auto it = std::max_element(density.begin(), density.end());
    return grid[static_cast<std::size_t>(it - density.begin())];
}

DensityEstimate estimate_density(std::span<const double> samples, std::size_t grid_size,
                                 std::optional<double> bandwidth) {
    if (samples.size() < kMinDensitySamples)
        throw DomainError("estimate_density: need at least 100 samples");
    if (grid_size < 2)
        throw DomainError("estimate_density: grid_size must be at least 2");
    for (double eta : samples)
        if (!(eta >= 0.0 && eta <= 1.0))
            throw DomainError("estimate_density: samples must lie in [0, 1]");

    DensityEstimate out;
    out.grid.resize(grid_size);
    const double spacing = 1.0 / static_cast<double>(grid_size - 1);
    for (std::size_t i = 0; i < grid_size; ++i)
        out.grid[i] = static_cast<double>(i) * spacing;

    const double n = static_cast<double>(samples.size());
    if (bandwidth) {
        if (!(*bandwidth > 0.0) || !std::isfinite(*bandwidth))
            throw DomainError("estimate_density: bandwidth must be positive");
        out.bandwidth = *bandwidth;
    } else {
        double mean = 0.0;
        for (double eta : samples)
            mean += eta;
        mean /= n;
        double var = 0.0;
        for (double eta : samples)
            var += (eta - mean) * (eta - mean);
        const double sd = std::sqrt(var / (n - 1.0));

        std::vector<double> sorted(samples.begin(), samples.end());
        std::sort(sorted.begin(), sorted.end());
        const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);

        double spread = sd;
        if (iqr > 0.0)
            spread = std::min(spread, iqr / 1.34);
        if (spread > 0.0 && sorted.front() != sorted.back()) {
            out.bandwidth = 0.9 * spread * std::pow(n, -0.2);
        } else {
            out.degenerate = true;
            out.bandwidth = 2.0 * spacing;
        }
    }
    const double h = out.bandwidth;
    out.density.assign(grid_size, 0.0);

    const double fine_width = 1.0 / static_cast<double>(kFineBins);
    if (h < 8.0 * fine_width) {
        // too narrow for binning; direct sum
        for (std::size_t g = 0; g < grid_size; ++g) {
            double acc = 0.0;
            for (double eta : samples)
                acc += reflected_kernel(out.grid[g], eta, h);
            out.density[g] = acc / n;
        }
        return out;
    }

    // linear binning onto kFineBins + 1 nodes, then kernel sums over nodes
    std::vector<double> weights(kFineBins + 1, 0.0);
    for (double eta : samples) {
        const double pos = eta * static_cast<double>(kFineBins);
        const std::size_t lo = std::min(static_cast<std::size_t>(pos), kFineBins - 1);
        const double frac = pos - static_cast<double>(lo);
        weights[lo] += 1.0 - frac;
        weights[lo + 1] += frac;
    }
    const auto reach = static_cast<std::ptrdiff_t>(std::ceil(kKernelCutoff * h / fine_width)) + 1;
    for (std::size_t g = 0; g < grid_size; ++g) {
        const double x = out.grid[g];
        double acc = 0.0;
        // direct images near x, mirrored images near -x and 2 - x
        for (double centre : {x, -x, 2.0 - x}) {
            const auto mid = static_cast<std::ptrdiff_t>(std::llround(centre * static_cast<double>(kFineBins)));
            const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, mid - reach);
            const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(kFineBins), mid + reach);
            for (std::ptrdiff_t j = lo; j <= hi; ++j) {
                const double w = weights[static_cast<std::size_t>(j)];
                if (w == 0.0)
                    continue;
                const double u = (centre - static_cast<double>(j) * fine_width) / h;
                if (std::abs(u) <= kKernelCutoff)
                    acc += w * std::exp(-0.5 * u * u);
            }
        }
        out.density[g] = acc / (n * h * std::sqrt(2.0 * std::numbers::pi));
    }
    return out;
}

} // namespace atmochan
