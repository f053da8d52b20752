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

#include "atmochan/pdt_engine.hpp"

#include <Eigen/Core>

#include <complex>
#include <limits>
#include <span>
#include <vector>

namespace atmochan {

// Conventions: quadratures x = a + a^dagger, p = -i(a - a^dagger); the vacuum
// has unit quadrature variance, so squeezing in dB is 10 log10(V).

// Transmittance moments of the (postselected) channel with the deterministic
// efficiency f folded in: mean_eta = f <eta>, mean_sqrt_eta = sqrt(f) <sqrt eta>.
struct ChannelMoments {
    double mean_eta = 1.0;
    double mean_sqrt_eta = 1.0;
    double eta_min = 0.0;
    double deterministic_factor = 1.0;
    double fraction_kept = 1.0;

    // <eta> - <sqrt eta>^2, the excess noise injected per unit |<a>|^2.
    // Differences at the rounding level of <eta> count as a deterministic
    // channel.
    double fluctuation() const noexcept {
        const double f = mean_eta - mean_sqrt_eta * mean_sqrt_eta;
        return f > 8.0 * std::numeric_limits<double>::epsilon() * mean_eta ? f : 0.0;
    }

    static ChannelMoments deterministic(double eta);
    void validate() const;
};

ChannelMoments channel_moments(std::span<const double> ensemble, double eta_min, double deterministic_factor);
inline ChannelMoments channel_moments(const TransmittanceEnsemble &ensemble, double eta_min,
                                      double deterministic_factor) {
    return channel_moments(ensemble.view(), eta_min, deterministic_factor);
}

struct SingleModeGaussianState {
    std::complex<double> displacement{0.0, 0.0};
    double quad_variance_x = 1.0;
    double quad_variance_p = 1.0;

    static SingleModeGaussianState squeezed_db(double db);
};

SingleModeGaussianState transmit_single_mode(const SingleModeGaussianState &state, const ChannelMoments &moments);

inline double to_db(double variance) { return 10.0 * std::log10(variance); }
inline double from_db(double db) { return std::pow(10.0, db / 10.0); }

struct SqueezingPoint {
    double eta_min = 0.0;
    double output_db = 0.0;
    double fraction_kept = 0.0;
    double output_db_sem = 0.0; // standard error propagated from <eta>
};

struct SqueezingCurve {
    std::vector<SqueezingPoint> points;
    bool truncated = false;        // some thresholds emptied the postselection
    double first_empty_threshold = 0.0;
};

SqueezingCurve squeezing_vs_threshold(double input_db, std::span<const double> ensemble,
                                      std::span<const double> thresholds, double deterministic_factor);

// Displaced two-mode squeezed vacuum: TMSV with parameter xi, mode A displaced
// by `displacement_a`. Mode A is the one sent through the channel.
struct GaussianTwoModeState {
    double squeezing_xi = 0.0;
    std::complex<double> displacement_a{0.0, 0.0};
};

// Central second moments <dF_i^dagger dF_j> for F = (a, a^dagger, b, b^dagger).
using MomentMatrix = Eigen::Matrix4cd;

MomentMatrix tmsv_moment_matrix(const GaussianTwoModeState &state, const ChannelMoments &moments);

// Moment-form partial transposition: b <-> b^dagger inside every moment.
MomentMatrix partial_transpose(const MomentMatrix &matrix);

// W = det of the partially transposed moment matrix; W < 0 certifies
// entanglement.
double simon_test(const MomentMatrix &matrix);

struct EntanglementRegion {
    std::vector<double> xi_grid;
    std::vector<double> displacement_grid;
    std::vector<double> w_values; // row-major [xi][displacement]
    // Zero contour as a polyline in (xi, |<a>|); empty when W never changes
    // sign inside the grid.
    std::vector<std::pair<double, double>> contour;

    double w(std::size_t i_xi, std::size_t i_disp) const { return w_values[i_xi * displacement_grid.size() + i_disp]; }
};

EntanglementRegion entanglement_region(const ChannelMoments &moments, std::span<const double> xi_grid,
                                       std::span<const double> displacement_grid);

// Smallest |<a>| at which W turns non-negative for fixed xi, found by
// bisection on [0, max_displacement]. Returns +inf if W stays negative and
// 0 if it is already non-negative at zero displacement.
double boundary_displacement(const ChannelMoments &moments, double xi, double max_displacement);

// Squeezing parameter above which W >= 0 at zero displacement
// (sinh^2 xi* = <sqrt eta>^2 / (<eta> - <sqrt eta>^2)); +inf for a
// deterministic channel.
double boundary_squeezing(const ChannelMoments &moments);

} // namespace atmochan
