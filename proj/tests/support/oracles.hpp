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

// Independent reference computations used only by the test suites. None of
// these share code paths with the library; they trade speed for directness.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

namespace atmochan::oracle {

// I_n(x) from its power series, summed in long double until the terms vanish.
inline long double bessel_series(int order, long double x) {
    const long double q = x * x / 4.0L;
    long double term = order == 0 ? 1.0L : x / 2.0L;
    long double sum = term;
    for (int k = 1; k < 2000; ++k) {
        term *= q / (static_cast<long double>(k) * static_cast<long double>(k + order));
        sum += term;
        if (term < 1e-22L * sum)
            break;
    }
    return sum;
}

// exp(-x) I0(x) from the leading terms of the large-argument expansion.
inline long double scaled_i0_asymptotic(long double x) {
    return (1.0L + 1.0L / (8.0L * x) + 9.0L / (128.0L * x * x)) /
           std::sqrt(2.0L * std::numbers::pi_v<long double> * x);
}

// Lambert W0 by plain Newton iteration on w e^w - x = 0 in long double.
inline long double lambert_newton(long double x) {
    long double w = x < 1.0L ? x : std::log(x);
    for (int it = 0; it < 200; ++it) {
        const long double ew = std::exp(w);
        const long double step = (w * ew - x) / (ew * (w + 1.0L));
        w -= step;
        if (std::abs(step) < 1e-19L * (1.0L + std::abs(w)))
            break;
    }
    return w;
}

// Direct long-double transcription of the shape exponent and scale radius
// formulas (no series rearrangement). Valid where a*xi is not tiny.
struct ShapeScaleRef {
    long double shape;
    long double scale;
};

inline ShapeScaleRef shape_scale_reference(long double xi, long double a) {
    const long double t = a * a * xi * xi;
    const long double e_i0 = std::exp(-t) * std::cyl_bessel_i(0.0L, t);
    const long double e_i1 = std::exp(-t) * std::cyl_bessel_i(1.0L, t);
    const long double log_ratio = std::log(2.0L * (1.0L - std::exp(-0.5L * t)) / (1.0L - e_i0));
    const long double shape = 2.0L * t * e_i1 / (1.0L - e_i0) / log_ratio;
    const long double scale = std::pow(log_ratio, -1.0L / shape);
    return {shape, scale};
}

// Effective squared spot radius with the Lambert argument formed explicitly.
inline long double effective_spot_reference(long double w1_sq, long double w2_sq, long double angle,
                                            long double a) {
    const long double a2 = a * a;
    const long double arg = 4.0L * a2 / std::sqrt(w1_sq * w2_sq) *
                            std::exp(2.0L * a2 * (1.0L / w1_sq + 1.0L / w2_sq)) *
                            std::exp(a2 * (1.0L / w1_sq - 1.0L / w2_sq) * std::cos(2.0L * angle));
    return 4.0L * a2 / lambert_newton(arg);
}

// Gauss-Legendre nodes/weights on [-1, 1] by Newton on P_n.
inline void gauss_legendre(int n, std::vector<double> &nodes, std::vector<double> &weights) {
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double step = p1 / dp;
            x -= step;
            if (std::abs(step) < 1e-15)
                break;
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
}

// Fraction of the elliptic Gaussian intensity
//   2/(pi W1 W2) exp(-2 u^2/W1^2 - 2 v^2/W2^2)
// (u along the first semi-axis, which points at angle `phi`) centred at
// (x0, y0) that falls inside the disk of radius a about the origin.
// The v-integral is done in closed form with erf; the u-integral by composite
// Gauss-Legendre after the substitution s = a sin(theta).
inline double disk_integral(double w1_sq, double w2_sq, double phi, double x0, double y0, double a) {
    const double w1 = std::sqrt(w1_sq);
    const double w2 = std::sqrt(w2_sq);
    // disk centre in the beam's principal frame
    const double cu = -(x0 * std::cos(phi) + y0 * std::sin(phi));
    const double cv = -(-x0 * std::sin(phi) + y0 * std::cos(phi));
    const double s1 = w1 / 2.0;
    const double s2 = w2 / 2.0;

    // s is the u-offset from the disk centre: u = cu + s
    double lo = std::max(-a, -cu - 12.0 * s1);
    double hi = std::min(a, -cu + 12.0 * s1);
    if (lo >= hi)
        return 0.0;
    const double th_lo = std::asin(std::clamp(lo / a, -1.0, 1.0));
    const double th_hi = std::asin(std::clamp(hi / a, -1.0, 1.0));

    static thread_local std::vector<double> nodes, weights;
    if (nodes.empty())
        gauss_legendre(24, nodes, weights);

    const int panels = 64;
    const double width = (th_hi - th_lo) / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double mid = th_lo + (p + 0.5) * width;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const double th = mid + 0.5 * width * nodes[i];
            const double s = a * std::sin(th);
            const double h = a * std::cos(th);
            const double u = cu + s;
            const double g1 = std::exp(-0.5 * u * u / (s1 * s1)) / (s1 * std::sqrt(2.0 * std::numbers::pi));
            const double inner = 0.5 * (std::erf((cv + h) / (s2 * std::numbers::sqrt2)) -
                                        std::erf((cv - h) / (s2 * std::numbers::sqrt2)));
            total += 0.5 * width * weights[i] * g1 * inner * a * std::cos(th);
        }
    }
    return total;
}

} // namespace atmochan::oracle
