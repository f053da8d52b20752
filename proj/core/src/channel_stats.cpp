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

#include "atmochan/channel_stats.hpp"

#include "atmochan/errors.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace atmochan {

namespace {

void require_nonnegative(double value, const char *what) {
    if (!std::isfinite(value) || value < 0.0) {
        std::ostringstream msg;
        msg << what << " must be finite and non-negative, got " << value;
        throw DomainError(msg.str());
    }
}

void require_positive(double value, const char *what) {
    if (!std::isfinite(value) || value <= 0.0) {
        std::ostringstream msg;
        msg << what << " must be finite and positive, got " << value;
        throw DomainError(msg.str());
    }
}

} // namespace

double rytov_variance(double cn2, double wave_number, double link_length) {
    require_nonnegative(cn2, "cn2");
    require_positive(wave_number, "wave_number");
    require_positive(link_length, "link_length");
    return 1.23 * cn2 * std::pow(wave_number, 7.0 / 6.0) * std::pow(link_length, 11.0 / 6.0);
}

double divergence_from_microphysics(double zeta0, double n0, double link_length, double w0) {
    require_positive(zeta0, "zeta0");
    require_nonnegative(n0, "n0");
    require_positive(link_length, "link_length");
    require_positive(w0, "w0");
    const double phase_variance = 0.25 * std::numbers::pi * n0 * link_length * zeta0 * zeta0;
    return (2.0 / 3.0) * phase_variance * w0 * w0 / (4.0 * zeta0 * zeta0);
}

double divergence_from_transport(double albedo, double optical_depth, double mean_sq_angle,
                                 double fresnel_number, double w0, double link_length) {
    require_nonnegative(albedo, "albedo");
    if (albedo > 1.0)
        throw DomainError("albedo must lie in [0, 1]");
    require_nonnegative(optical_depth, "optical_depth");
    require_nonnegative(mean_sq_angle, "mean_sq_angle");
    require_positive(fresnel_number, "fresnel_number");
    require_positive(w0, "w0");
    require_positive(link_length, "link_length");
    return (2.0 / 3.0) * fresnel_number * fresnel_number / (w0 * w0) * albedo * optical_depth *
           link_length * link_length * mean_sq_angle;
}

double extinction_factor(const ExtinctionSpec &spec, double link_length) {
    if (!std::isfinite(spec.molecular) || spec.molecular <= 0.0 || spec.molecular > 1.0)
        throw DomainError("extinction.molecular must lie in (0, 1]");
    require_positive(link_length, "link_length");
    require_nonnegative(spec.rain_coefficient, "extinction.rain_coefficient");

    double chi = spec.molecular;
    if (spec.rain_rate) {
        require_nonnegative(*spec.rain_rate, "extinction.rain_rate");
        chi *= std::exp(-spec.rain_coefficient * std::pow(*spec.rain_rate, 0.74) * link_length);
    }
    if (!(chi > 0.0)) {
        std::ostringstream msg;
        msg << "extinction factor underflows to zero (rain rate " << spec.rain_rate.value_or(0.0)
            << " mm/h, coefficient " << spec.rain_coefficient << ", L = " << link_length << " m)";
        throw DegenerateChannelError(msg.str());
    }
    return chi;
}

double beam_wandering_variance(double w0, double rytov_sq, double fresnel_number) {
    require_positive(w0, "w0");
    require_nonnegative(rytov_sq, "rytov_sq");
    require_positive(fresnel_number, "fresnel_number");
    return 0.33 * w0 * w0 * rytov_sq * std::pow(fresnel_number, -7.0 / 6.0);
}

SpotMoments spot_moments(double w0, double fresnel_number, double rytov_sq, double xi_divergence) {
    require_positive(w0, "w0");
    require_positive(fresnel_number, "fresnel_number");
    require_nonnegative(rytov_sq, "rytov_sq");
    require_nonnegative(xi_divergence, "xi_divergence");

    const double w0_sq = w0 * w0;
    SpotMoments m;
    m.mean_w_sq = w0_sq / (fresnel_number * fresnel_number) *
                  (1.0 + xi_divergence + 2.96 * rytov_sq * std::pow(fresnel_number, 5.0 / 9.0));
    const double scale = w0_sq * w0_sq * std::pow(fresnel_number, -19.0 / 6.0) * (1.0 + xi_divergence) * rytov_sq;
    m.cov_w_sq << 1.2 * scale, -0.8 * scale, -0.8 * scale, 1.2 * scale;
    return m;
}

ThetaStatistics theta_statistics(const SpotMoments &moments, double w0) {
    require_positive(moments.mean_w_sq, "mean_w_sq");
    require_positive(w0, "w0");

    const double mean = moments.mean_w_sq;
    ThetaStatistics out;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            const double arg = 1.0 + moments.cov_w_sq(i, j) / (mean * mean);
            if (!(arg > 0.0)) {
                std::ostringstream msg;
                msg << "unphysical spot-size covariance: 1 + <dW_" << i + 1 << "^2 dW_" << j + 1
                    << "^2>/<W^2>^2 = " << arg << " is not positive";
                throw StatisticsError(msg.str());
            }
            out.cov(i, j) = std::log1p(moments.cov_w_sq(i, j) / (mean * mean));
        }
        out.mean(i) = std::log(mean / (w0 * w0)) - 0.5 * out.cov(i, i);
    }
    return out;
}

double divergence_parameter(const ScatteringParams &scattering, const ChannelGeometry &geometry) {
    switch (scattering.mode) {
    case ScatteringMode::none:
        return 0.0;
    case ScatteringMode::microphysical:
        return divergence_from_microphysics(scattering.zeta0, scattering.n0, geometry.link_length,
                                            geometry.beam_waist_w0);
    case ScatteringMode::phenomenological:
        require_nonnegative(scattering.xi_divergence, "scattering.xi_divergence");
        return scattering.xi_divergence;
    case ScatteringMode::transport:
        return divergence_from_transport(scattering.albedo, scattering.optical_depth, scattering.mean_sq_angle,
                                         geometry.fresnel_number(), geometry.beam_waist_w0,
                                         geometry.link_length);
    }
    throw DomainError("unknown scattering mode");
}

ChannelStatistics assemble_statistics(const ChannelGeometry &geometry, const TurbulenceParams &turbulence,
                                      const ScatteringParams &scattering, const ExtinctionSpec &extinction) {
    geometry.validate();

    ChannelStatistics stats;
    if (turbulence.rytov_sq) {
        require_nonnegative(*turbulence.rytov_sq, "turbulence.rytov_sq");
        stats.rytov_sq = *turbulence.rytov_sq;
        if (turbulence.cn2)
            stats.warnings.emplace_back("both cn2 and rytov_sq given; using rytov_sq");
    } else if (turbulence.cn2) {
        stats.rytov_sq = rytov_variance(*turbulence.cn2, geometry.wave_number(), geometry.link_length);
    } else {
        throw DomainError("turbulence: one of cn2 or rytov_sq must be given");
    }

    stats.xi_divergence = divergence_parameter(scattering, geometry);
    stats.chi_ext = extinction_factor(extinction, geometry.link_length);

    const double w0 = geometry.beam_waist_w0;
    const double omega = geometry.fresnel_number();
    const double wander = beam_wandering_variance(w0, stats.rytov_sq, omega);
    const ThetaStatistics theta = theta_statistics(spot_moments(w0, omega, stats.rytov_sq, stats.xi_divergence), w0);

    stats.mu << 0.0, 0.0, theta.mean(0), theta.mean(1);
    stats.sigma.setZero();
    stats.sigma(0, 0) = wander;
    stats.sigma(1, 1) = wander;
    stats.sigma.block<2, 2>(2, 2) = theta.cov;

    // throws StatisticsError if sigma is not PSD beyond the clamping tolerance
    MvnSampler check(stats.mu, stats.sigma);
    (void)check;
    return stats;
}

} // namespace atmochan
