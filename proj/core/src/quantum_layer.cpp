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

#include "atmochan/quantum_layer.hpp"

#include "atmochan/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace atmochan {

namespace {

void require_factor(double f) {
    if (!(f > 0.0) || f > 1.0)
        throw DomainError("deterministic_factor must lie in (0, 1]");
}

using Complex = std::complex<double>;

// Laplace expansion along the first row; exact zeros stay exact, which keeps
// the separable xi = 0 row at W = 0 rather than at rounding noise.
Complex det3(const MomentMatrix &m, int skip_row, int skip_col) {
    int r[3], c[3];
    for (int i = 0, k = 0; i < 4; ++i)
        if (i != skip_row)
            r[k++] = i;
    for (int j = 0, k = 0; j < 4; ++j)
        if (j != skip_col)
            c[k++] = j;
    auto e = [&](int i, int j) { return m(r[i], c[j]); };
    return e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1)) - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0)) +
           e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0));
}

Complex det4(const MomentMatrix &m) {
    Complex sum{0.0, 0.0};
    for (int j = 0; j < 4; ++j) {
        if (m(0, j) == Complex{0.0, 0.0})
            continue;
        const Complex minor = det3(m, 0, j);
        sum += (j % 2 == 0 ? 1.0 : -1.0) * m(0, j) * minor;
    }
    return sum;
}

double w_at(const ChannelMoments &moments, double xi, double displacement) {
    return simon_test(tmsv_moment_matrix({xi, {displacement, 0.0}}, moments));
}

} // namespace

ChannelMoments ChannelMoments::deterministic(double eta) {
    if (!(eta > 0.0) || eta > 1.0)
        throw DomainError("deterministic channel transmittance must lie in (0, 1]");
    ChannelMoments m;
    m.mean_eta = eta;
    m.mean_sqrt_eta = std::sqrt(eta);
    return m;
}

void ChannelMoments::validate() const {
    constexpr double tol = 1e-12;
    const double s2 = mean_sqrt_eta * mean_sqrt_eta;
    if (!(mean_sqrt_eta >= 0.0) || s2 > mean_eta + tol || mean_eta > mean_sqrt_eta + tol || mean_sqrt_eta > 1.0 + tol) {
        std::ostringstream msg;
        msg << "channel moments violate <sqrt eta>^2 <= <eta> <= <sqrt eta> <= 1: <eta> = " << mean_eta
            << ", <sqrt eta> = " << mean_sqrt_eta;
        throw StatisticsError(msg.str());
    }
    require_factor(deterministic_factor);
}

ChannelMoments channel_moments(std::span<const double> ensemble, double eta_min, double deterministic_factor) {
    require_factor(deterministic_factor);
    const PostselectedMoments m = postselected_moments(ensemble, eta_min);
    ChannelMoments out;
    out.mean_eta = deterministic_factor * m.mean_eta;
    out.mean_sqrt_eta = std::sqrt(deterministic_factor) * m.mean_sqrt_eta;
    out.eta_min = eta_min;
    out.deterministic_factor = deterministic_factor;
    out.fraction_kept = m.fraction_kept;
    return out;
}

SingleModeGaussianState SingleModeGaussianState::squeezed_db(double db) {
    SingleModeGaussianState s;
    s.quad_variance_x = from_db(db);
    s.quad_variance_p = 1.0 / s.quad_variance_x;
    return s;
}

SingleModeGaussianState transmit_single_mode(const SingleModeGaussianState &state, const ChannelMoments &moments) {
    if (!(state.quad_variance_x > 0.0) || !(state.quad_variance_p > 0.0))
        throw DomainError("transmit_single_mode: quadrature variances must be positive");
    const double n = moments.mean_eta;
    const double f = moments.fluctuation();
    const double x_mean = 2.0 * state.displacement.real();
    const double p_mean = 2.0 * state.displacement.imag();

    SingleModeGaussianState out;
    out.displacement = moments.mean_sqrt_eta * state.displacement;
    out.quad_variance_x = n * state.quad_variance_x + (1.0 - n) + f * x_mean * x_mean;
    out.quad_variance_p = n * state.quad_variance_p + (1.0 - n) + f * p_mean * p_mean;
    return out;
}

SqueezingCurve squeezing_vs_threshold(double input_db, std::span<const double> ensemble,
                                      std::span<const double> thresholds, double deterministic_factor) {
    if (!(input_db < 0.0))
        throw DomainError("squeezing_vs_threshold: input must be squeezed (input_db < 0)");
    require_factor(deterministic_factor);
    if (!std::is_sorted(thresholds.begin(), thresholds.end()))
        throw DomainError("squeezing_vs_threshold: thresholds must be ascending");

    const PostselectionTable table(ensemble);
    const SingleModeGaussianState input = SingleModeGaussianState::squeezed_db(input_db);

    SqueezingCurve curve;
    for (double eta_min : thresholds) {
        PostselectedMoments m;
        try {
            m = table.at(eta_min);
        } catch (const EmptySelectionError &) {
            curve.truncated = true;
            curve.first_empty_threshold = eta_min;
            break;
        }
        ChannelMoments moments;
        moments.mean_eta = deterministic_factor * m.mean_eta;
        moments.mean_sqrt_eta = std::sqrt(deterministic_factor) * m.mean_sqrt_eta;
        moments.eta_min = eta_min;
        moments.deterministic_factor = deterministic_factor;
        moments.fraction_kept = m.fraction_kept;

        const SingleModeGaussianState out = transmit_single_mode(input, moments);
        SqueezingPoint point;
        point.eta_min = eta_min;
        point.output_db = to_db(out.quad_variance_x);
        point.fraction_kept = m.fraction_kept;
        // d(dB)/d<eta> = 10/ln(10) (V_in - 1) / V_out
        point.output_db_sem = std::abs(10.0 / std::numbers::ln10 * (input.quad_variance_x - 1.0) /
                                       out.quad_variance_x * deterministic_factor * m.sem_eta);
        curve.points.push_back(point);
    }
    return curve;
}

MomentMatrix tmsv_moment_matrix(const GaussianTwoModeState &state, const ChannelMoments &moments) {
    if (!(state.squeezing_xi >= 0.0) || !std::isfinite(state.squeezing_xi))
        throw DomainError("tmsv_moment_matrix: squeezing parameter must be finite and non-negative");

    const double sh = std::sinh(state.squeezing_xi);
    const double ch = std::cosh(state.squeezing_xi);
    const double n_tmsv = sh * sh;
    const double f = moments.fluctuation();
    const Complex alpha = state.displacement_a;

    // mode A after the channel
    const Complex n_a = moments.mean_eta * n_tmsv + f * std::norm(alpha); // <da^dag da>
    const Complex m_a = f * alpha * alpha;                                // <da da>
    const Complex c_ab = moments.mean_sqrt_eta * sh * ch;                 // <da db>
    const Complex zero{0.0, 0.0};
    // mode B is untouched
    const Complex n_b = n_tmsv;

    MomentMatrix v;
    // rows/cols: <dF_i^dag dF_j>, F = (a, a^dag, b, b^dag)
    v << n_a, std::conj(m_a), zero, std::conj(c_ab),
         m_a, n_a + 1.0, c_ab, zero,
         zero, std::conj(c_ab), n_b, zero,
         c_ab, zero, zero, n_b + 1.0;
    return v;
}

MomentMatrix partial_transpose(const MomentMatrix &v) {
    MomentMatrix pt = v;
    // cross moments: b <-> b^dag swaps the b-columns of the A rows and the
    // b-rows of the A columns
    for (int i = 0; i < 2; ++i) {
        pt(i, 2) = v(i, 3);
        pt(i, 3) = v(i, 2);
        pt(2, i) = v(3, i);
        pt(3, i) = v(2, i);
    }
    // normally ordered <b^dag b> is invariant; <b^2> and <b^dag 2> swap
    pt(2, 3) = v(3, 2);
    pt(3, 2) = v(2, 3);
    return pt;
}

double simon_test(const MomentMatrix &matrix) {
    return det4(partial_transpose(matrix)).real();
}

EntanglementRegion entanglement_region(const ChannelMoments &moments, std::span<const double> xi_grid,
                                       std::span<const double> displacement_grid) {
    if (xi_grid.empty() || displacement_grid.empty())
        throw DomainError("entanglement_region: grids must be non-empty");
    if (!std::is_sorted(xi_grid.begin(), xi_grid.end()) ||
        !std::is_sorted(displacement_grid.begin(), displacement_grid.end()))
        throw DomainError("entanglement_region: grids must be ascending");
    if (xi_grid.front() < 0.0 || displacement_grid.front() < 0.0)
        throw DomainError("entanglement_region: grids must be non-negative");

    EntanglementRegion region;
    region.xi_grid.assign(xi_grid.begin(), xi_grid.end());
    region.displacement_grid.assign(displacement_grid.begin(), displacement_grid.end());
    region.w_values.reserve(xi_grid.size() * displacement_grid.size());
    for (double xi : xi_grid)
        for (double d : displacement_grid)
            region.w_values.push_back(w_at(moments, xi, d));

    const std::size_t nd = displacement_grid.size();
    for (std::size_t i = 0; i < xi_grid.size(); ++i) {
        // the boundary crosses the zero-displacement axis between rows; the
        // separable xi = 0 row sits exactly on W = 0 and is not a crossing
        if (i > 0 && region.w(i - 1, 0) * region.w(i, 0) < 0.0) {
            const double w0 = region.w(i - 1, 0);
            const double w1 = region.w(i, 0);
            const double t = w0 / (w0 - w1);
            region.contour.emplace_back(xi_grid[i - 1] + t * (xi_grid[i] - xi_grid[i - 1]), displacement_grid[0]);
        }
        for (std::size_t j = 1; j < nd; ++j) {
            const double w0 = region.w(i, j - 1);
            const double w1 = region.w(i, j);
            if (w0 < 0.0 && w1 >= 0.0) {
                const double t = w0 / (w0 - w1);
                region.contour.emplace_back(xi_grid[i],
                                            displacement_grid[j - 1] + t * (displacement_grid[j] - displacement_grid[j - 1]));
                break;
            }
        }
    }
    std::sort(region.contour.begin(), region.contour.end());
    return region;
}

double boundary_displacement(const ChannelMoments &moments, double xi, double max_displacement) {
    if (w_at(moments, xi, 0.0) >= 0.0)
        return 0.0;
    if (w_at(moments, xi, max_displacement) < 0.0)
        return std::numeric_limits<double>::infinity();
    double lo = 0.0, hi = max_displacement;
    for (int it = 0; it < 200 && hi - lo > 1e-14 * (1.0 + hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (w_at(moments, xi, mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double boundary_squeezing(const ChannelMoments &moments) {
    const double f = moments.fluctuation();
    if (f <= 0.0)
        return std::numeric_limits<double>::infinity();
    return std::asinh(std::sqrt(moments.mean_sqrt_eta * moments.mean_sqrt_eta / f));
}

} // namespace atmochan
