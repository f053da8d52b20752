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
#include "atmochan/numerics.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

namespace atmochan {

// Turbulence strength, given either as the structure constant C_n^2
// [m^-2/3] or directly as the Rytov variance. When both are set the Rytov
// variance wins and assemble_statistics records a warning.
struct TurbulenceParams {
    std::optional<double> cn2;
    std::optional<double> rytov_sq;
};

enum class ScatteringMode { none, microphysical, phenomenological, transport };

struct ScatteringParams {
    ScatteringMode mode = ScatteringMode::none;
    // microphysical
    double zeta0 = 0.0; // correlation half-length [m]
    double n0 = 0.0;    // scatterer number density [m^-3]
    // phenomenological
    double xi_divergence = 0.0;
    // transport
    double albedo = 0.0;
    double optical_depth = 0.0;
    double mean_sq_angle = 0.0; // [rad^2]
};

struct ExtinctionSpec {
    static constexpr double kDefaultRainCoefficient = 210e-6;

    double molecular = 1.0;
    std::optional<double> rain_rate; // [mm/h]
    double rain_coefficient = kDefaultRainCoefficient; // [(mm/h)^-0.74 m^-1]
};

// Gaussian law of v = (x0, y0, theta1, theta2) plus the extinction factor.
struct ChannelStatistics {
    Vector4 mu = Vector4::Zero();
    Matrix4 sigma = Matrix4::Zero();
    double chi_ext = 1.0;
    double rytov_sq = 0.0;
    double xi_divergence = 0.0;
    std::vector<std::string> warnings;
};

struct SpotMoments {
    double mean_w_sq = 0.0;                          // <W_1^2> = <W_2^2>  [m^2]
    Eigen::Matrix2d cov_w_sq = Eigen::Matrix2d::Zero(); // <dW_i^2 dW_j^2>  [m^4]
};

struct ThetaStatistics {
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
};

// sigma_R^2 = 1.23 C_n^2 k^(7/6) L^(11/6)
double rytov_variance(double cn2, double wave_number, double link_length);

// Xi from scatterer density; the correlation length cancels:
//   Xi = (2/3) (pi/4) n0 L zeta0^2 W0^2 / (4 zeta0^2) = (pi/24) n0 L W0^2
double divergence_from_microphysics(double zeta0, double n0, double link_length, double w0);

// Xi matched to the small-angle transport broadening
//   <W^2> = W0^2/Omega^2 + (2/3) A tau L^2 psi^2,
// i.e. Xi = (2/3) (Omega^2 / W0^2) A tau L^2 psi^2.
double divergence_from_transport(double albedo, double optical_depth, double mean_sq_angle,
                                 double fresnel_number, double w0, double link_length);

// molecular * exp(-c I^0.74 L); throws DegenerateChannelError on underflow.
double extinction_factor(const ExtinctionSpec &spec, double link_length);

// <x0^2> = <y0^2> = 0.33 W0^2 sigma_R^2 Omega^(-7/6)
double beam_wandering_variance(double w0, double rytov_sq, double fresnel_number);

SpotMoments spot_moments(double w0, double fresnel_number, double rytov_sq, double xi_divergence);

// Log-normal moment matching of W_i^2 = W0^2 exp(theta_i).
ThetaStatistics theta_statistics(const SpotMoments &moments, double w0);

// Resolves the divergence parameter for the configured scattering mode.
double divergence_parameter(const ScatteringParams &scattering, const ChannelGeometry &geometry);

ChannelStatistics assemble_statistics(const ChannelGeometry &geometry, const TurbulenceParams &turbulence,
                                      const ScatteringParams &scattering, const ExtinctionSpec &extinction);

} // namespace atmochan
