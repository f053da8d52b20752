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

#include <cmath>
#include <numbers>

namespace atmochan {

// Transmitter beam, link and receiver aperture. Lengths in meters.
struct ChannelGeometry {
    double wavelength = 780e-9;
    double beam_waist_w0 = 0.02;  // initial spot radius W0
    double link_length = 1600.0;  // L
    double focal_length = 1600.0; // F
    double aperture_radius = 0.075;

    // Throws DomainError unless every field is finite and strictly positive.
    void validate() const;

    double wave_number() const noexcept { return 2.0 * std::numbers::pi / wavelength; }
    // Omega = k W0^2 / (2 L)
    double fresnel_number() const noexcept {
        return wave_number() * beam_waist_w0 * beam_waist_w0 / (2.0 * link_length);
    }
};

// One realization of the elliptic beam in the aperture plane.
//   x0, y0     beam centroid [m]
//   theta1/2   log spot sizes, W_i^2 = W0^2 exp(theta_i)
//   phi        orientation of the first ellipse semi-axis [rad], in [0, pi/2]
struct BeamSample {
    double x0 = 0.0;
    double y0 = 0.0;
    double theta1 = 0.0;
    double theta2 = 0.0;
    double phi = 0.0;

    double centroid_distance() const noexcept { return std::hypot(x0, y0); }
    // Centroid azimuth; zero for a centered beam.
    double centroid_azimuth() const noexcept {
        return (x0 == 0.0 && y0 == 0.0) ? 0.0 : std::atan2(y0, x0);
    }
    double w1_sq(double w0) const noexcept { return w0 * w0 * std::exp(theta1); }
    double w2_sq(double w0) const noexcept { return w0 * w0 * std::exp(theta2); }
};

// Shape exponent lambda(xi) and scale radius R(xi) share the same logarithm,
// so they are usually wanted together.
struct ShapeScale {
    double shape = 2.0;  // lambda
    double scale = 0.0;  // R; +inf at xi = 0
};

ShapeScale shape_and_scale(double xi, double aperture_radius);
double shape_exponent(double xi, double aperture_radius);
double scale_radius(double xi, double aperture_radius);

// How the Gaussian prefactor inside the third term of the centered-beam
// transmittance is read. `squared` uses exp(-(a^2/2)(1/W1 - 1/W2)^2), which is
// the form that agrees with direct integration of the elliptic Gaussian over
// the disk; `first_power` keeps the exponent linear in (1/W1 - 1/W2).
enum class CenteredExponent { squared, first_power };

// Transmittance of a centered elliptic beam with squared semi-axes w1_sq, w2_sq.
double eta_centered(double w1_sq, double w2_sq, double aperture_radius,
                    CenteredExponent form = CenteredExponent::squared);

// Effective squared spot radius for the relative angle phi - phi0.
double effective_spot_radius_sq(double w1_sq, double w2_sq, double angle, double aperture_radius);

// Aperture transmittance of one beam realization, without extinction.
double transmittance(const BeamSample &sample, const ChannelGeometry &geometry);

} // namespace atmochan
