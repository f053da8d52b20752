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

#include "atmochan/beam_model.hpp"

#include "atmochan/errors.hpp"
#include "atmochan/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace atmochan {

namespace {

void require_positive(double value, const char *what) {
    if (!std::isfinite(value) || value <= 0.0) {
        std::ostringstream msg;
        msg << what << " must be finite and positive, got " << value;
        throw DomainError(msg.str());
    }
}

// With t = a^2 xi^2:
//   D(t)   = 1 - exp(-t) I0(t)
//   N(t)   = 2 (1 - exp(-t/2))
//   log(N/D) is the logarithm shared by lambda and R.
// Both N and D vanish like t, so for t < 1 the difference N - D ~ t^2/2 is
// summed term by term instead of being formed by subtraction.
struct ApertureLog {
    double denominator; // D(t)
    double log_ratio;   // ln(N/D)
};

ApertureLog aperture_log(double t) {
    if (t < 1.0) {
        // exp(-t) I0(t) = sum_k (1/2)_k (-2t)^k / (k!)^2
        double p = 1.0;  // (1/2)_k (-2)^k / (k!)^2 at k = 0
        double q = -2.0; // -2 (-1/2)^k / k! at k = 0
        double tk = 1.0;
        double denominator = 0.0;
        double difference = 0.0;
        for (int k = 1; k < 60; ++k) {
            const double kd = static_cast<double>(k);
            p *= (kd - 0.5) * -2.0 / (kd * kd);
            q *= -0.5 / kd;
            tk *= t;
            const double d_term = -p * tk;
            const double diff_term = (q + p) * tk;
            denominator += d_term;
            difference += diff_term;
            if (std::abs(d_term) < 1e-18 * std::abs(denominator) &&
                std::abs(diff_term) <= 1e-18 * std::abs(difference))
                break;
        }
        return {denominator, std::log1p(difference / denominator)};
    }
    const double denominator = 1.0 - bessel_i0_scaled(t);
    const double numerator = -2.0 * std::expm1(-0.5 * t);
    return {denominator, std::log(numerator / denominator)};
}

} // namespace

void ChannelGeometry::validate() const {
    require_positive(wavelength, "geometry.wavelength");
    require_positive(beam_waist_w0, "geometry.beam_waist_w0");
    require_positive(link_length, "geometry.link_length");
    require_positive(focal_length, "geometry.focal_length");
    require_positive(aperture_radius, "geometry.aperture_radius");
}

ShapeScale shape_and_scale(double xi, double aperture_radius) {
    if (!std::isfinite(xi))
        throw DomainError("shape/scale function: xi must be finite");
    require_positive(aperture_radius, "aperture_radius");

    const double ax = aperture_radius * xi;
    const double t = ax * ax;
    if (t == 0.0)
        return {2.0, std::numeric_limits<double>::infinity()};

    const ApertureLog lg = aperture_log(t);
    const double shape = 2.0 * t * bessel_i1_scaled(t) / (lg.denominator * lg.log_ratio);
    const double scale = std::exp(-std::log(lg.log_ratio) / shape);
    return {shape, scale};
}

double shape_exponent(double xi, double aperture_radius) {
    return shape_and_scale(xi, aperture_radius).shape;
}

double scale_radius(double xi, double aperture_radius) {
    return shape_and_scale(xi, aperture_radius).scale;
}

double eta_centered(double w1_sq, double w2_sq, double aperture_radius, CenteredExponent form) {
    require_positive(w1_sq, "w1_sq");
    require_positive(w2_sq, "w2_sq");
    require_positive(aperture_radius, "aperture_radius");

    const double a2 = aperture_radius * aperture_radius;
    const double w1 = std::sqrt(w1_sq);
    const double w2 = std::sqrt(w2_sq);

    if (std::abs(w1 - w2) / w1 < 1e-9)
        return -std::expm1(-a2 / w1_sq - a2 / w2_sq);

    const double inv1 = 1.0 / w1_sq;
    const double inv2 = 1.0 / w2_sq;
    const double bessel_arg = a2 * std::abs(inv1 - inv2);
    const double first = std::exp(bessel_arg - a2 * (inv1 + inv2)) * bessel_i0_scaled(bessel_arg);

    const double d = 1.0 / w1 - 1.0 / w2;
    const double gaussian_arg = form == CenteredExponent::squared ? d * d : d;
    const double prefactor = -std::expm1(-0.5 * a2 * gaussian_arg);

    const ShapeScale ss = shape_and_scale(d, aperture_radius);
    const double base = (w1 + w2) * (w1 + w2) / std::abs(w1_sq - w2_sq) / ss.scale;
    const double third = 2.0 * prefactor * std::exp(-std::pow(base, ss.shape));

    return std::clamp(1.0 - first - third, 0.0, 1.0);
}

double effective_spot_radius_sq(double w1_sq, double w2_sq, double angle, double aperture_radius) {
    require_positive(w1_sq, "w1_sq");
    require_positive(w2_sq, "w2_sq");
    require_positive(aperture_radius, "aperture_radius");
    if (!std::isfinite(angle))
        throw DomainError("effective_spot_radius_sq: angle must be finite");

    const double a2 = aperture_radius * aperture_radius;
    const double inv1 = 1.0 / w1_sq;
    const double inv2 = 1.0 / w2_sq;
    // log of the Lambert-W argument; the argument itself overflows for
    // beams much smaller than the aperture
    const double log_arg = std::log(4.0 * a2) - 0.5 * (std::log(w1_sq) + std::log(w2_sq)) +
                           2.0 * a2 * (inv1 + inv2) + a2 * (inv1 - inv2) * std::cos(2.0 * angle);
    return 4.0 * a2 / lambert_w0_exp(log_arg);
}

double transmittance(const BeamSample &sample, const ChannelGeometry &geometry) {
    if (!std::isfinite(sample.x0) || !std::isfinite(sample.y0) || !std::isfinite(sample.theta1) ||
        !std::isfinite(sample.theta2) || !std::isfinite(sample.phi))
        throw DomainError("transmittance: beam sample has non-finite components");

    const double a = geometry.aperture_radius;
    const double w0 = geometry.beam_waist_w0;
    const double w1_sq = sample.w1_sq(w0);
    const double w2_sq = sample.w2_sq(w0);

    const double eta0 = eta_centered(w1_sq, w2_sq, a);
    const double rho0 = sample.centroid_distance();
    if (rho0 == 0.0)
        return eta0;

    const double angle = sample.phi - sample.centroid_azimuth();
    const double w_eff_sq = effective_spot_radius_sq(w1_sq, w2_sq, angle, a);
    const ShapeScale ss = shape_and_scale(2.0 / std::sqrt(w_eff_sq), a);
    const double eta = eta0 * std::exp(-std::pow(rho0 / a / ss.scale, ss.shape));
    return std::clamp(eta, 0.0, eta0);
}

} // namespace atmochan
