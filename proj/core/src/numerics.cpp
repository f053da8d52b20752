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

#include "atmochan/numerics.hpp"

#include "atmochan/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

namespace atmochan {

namespace {

void require_nonnegative_finite(double x, const char *fn) {
    if (!std::isfinite(x) || x < 0.0) {
        std::ostringstream msg;
        msg << fn << ": argument must be finite and non-negative, got " << x;
        throw DomainError(msg.str());
    }
}

// sum_k (x^2/4)^k / (k! (k+order)!)   for order 0 or 1
double bessel_power_sum(double x, int order) {
    const double q = 0.25 * x * x;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 500; ++k) {
        term *= q / (static_cast<double>(k) * static_cast<double>(k + order));
        sum += term;
        if (term < 1e-17 * sum)
            break;
    }
    return sum;
}

// sqrt(2 pi x) exp(-x) I_order(x) via the Hankel expansion, x >= 30.
double bessel_asymptotic_sum(double x, int order) {
    const double mu = 4.0 * order * order;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 200; ++k) {
        const double odd = 2.0 * k - 1.0;
        const double next = -term * (mu - odd * odd) / (8.0 * k * x);
        if (std::abs(next) >= std::abs(term))
            break;
        term = next;
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum))
            break;
    }
    return sum;
}

double bessel_scaled(double x, int order) {
    if (x < kBesselAsymptoticSwitch) {
        const double prefactor = order == 0 ? 1.0 : 0.5 * x;
        return prefactor * bessel_power_sum(x, order) * std::exp(-x);
    }
    return bessel_asymptotic_sum(x, order) / std::sqrt(2.0 * std::numbers::pi * x);
}

double bessel_unscaled(double x, int order) {
    if (x < kBesselAsymptoticSwitch) {
        const double prefactor = order == 0 ? 1.0 : 0.5 * x;
        return prefactor * bessel_power_sum(x, order);
    }
    // exp(x) overflows just above x = 709; let it, the scaled form is the
    // overflow-safe entry point.
    return bessel_asymptotic_sum(x, order) / std::sqrt(2.0 * std::numbers::pi * x) * std::exp(x);
}

// Halley iteration on w + ln(w) = y, for y large enough that w > 1.
double lambert_w0_log_domain(double y) {
    double w = y - std::log(y);
    for (int it = 0; it < 50; ++it) {
        const double f = w + std::log(w) - y;
        const double d1 = 1.0 + 1.0 / w;
        const double d2 = -1.0 / (w * w);
        const double step = f / (d1 - 0.5 * f * d2 / d1);
        w -= step;
        if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * w)
            break;
    }
    return w;
}

constexpr std::uint64_t splitmix64(std::uint64_t &state) noexcept {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
}

} // namespace

double bessel_i0(double x) {
    require_nonnegative_finite(x, "bessel_i0");
    return bessel_unscaled(x, 0);
}

double bessel_i1(double x) {
    require_nonnegative_finite(x, "bessel_i1");
    return bessel_unscaled(x, 1);
}

double bessel_i0_scaled(double x) {
    require_nonnegative_finite(x, "bessel_i0_scaled");
    return bessel_scaled(x, 0);
}

double bessel_i1_scaled(double x) {
    require_nonnegative_finite(x, "bessel_i1_scaled");
    return bessel_scaled(x, 1);
}

double lambert_w0(double x) {
    require_nonnegative_finite(x, "lambert_w0");
    if (x == 0.0)
        return 0.0;
    if (x > 1e4)
        return lambert_w0_log_domain(std::log(x));

    double w = x < 3.0 ? std::log1p(x) : std::log(x) - std::log(std::log(x));
    for (int it = 0; it < 60; ++it) {
        const double ew = std::exp(w);
        const double f = w * ew - x;
        const double wp1 = w + 1.0;
        const double step = f / (ew * wp1 - 0.5 * (w + 2.0) * f / wp1);
        w -= step;
        if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(w))
            break;
    }
    return w;
}

double lambert_w0_exp(double y) {
    if (!std::isfinite(y))
        throw DomainError("lambert_w0_exp: argument must be finite, got " + std::to_string(y));
    if (y < 9.0)
        return lambert_w0(std::exp(y));
    return lambert_w0_log_domain(y);
}

RandomSource::RandomSource(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
    std::uint64_t key = seed;
    const std::uint64_t seed_mix = splitmix64(key);
    std::uint64_t state = seed_mix ^ (0xD1B54A32D192ED03ULL * (stream_id + 1));
    // discard one output so adjacent stream ids decorrelate through the mixer
    splitmix64(state);
    for (auto &word : state_)
        word = splitmix64(state);
}

std::uint64_t RandomSource::next_u64() noexcept {
    // xoshiro256**
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double RandomSource::uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomSource::normal() noexcept {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double scale = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * scale;
    has_spare_ = true;
    return u * scale;
}

MvnSampler::MvnSampler(const Vector4 &mu, const Matrix4 &sigma) : mu_(mu) {
    if (!mu.allFinite() || !sigma.allFinite())
        throw StatisticsError("sample_mvn: mean or covariance contains non-finite entries");

    const double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());
    if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance * scale) {
        std::ostringstream msg;
        msg << "sample_mvn: covariance matrix is not symmetric:\n" << sigma;
        throw StatisticsError(msg.str());
    }

    Eigen::SelfAdjointEigenSolver<Matrix4> eig(sigma);
    if (eig.info() != Eigen::Success) {
        std::ostringstream msg;
        msg << "sample_mvn: eigen-decomposition failed for covariance matrix:\n" << sigma;
        throw StatisticsError(msg.str());
    }
    Vector4 values = eig.eigenvalues();
    for (int i = 0; i < 4; ++i) {
        if (values(i) < kEigenvalueTolerance) {
            std::ostringstream msg;
            msg << "sample_mvn: covariance matrix is not positive semidefinite (eigenvalue "
                << values(i) << "):\n" << sigma;
            throw StatisticsError(msg.str());
        }
        values(i) = values(i) < 0.0 ? 0.0 : std::sqrt(values(i));
    }
    root_ = eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose();
}

Vector4 MvnSampler::operator()(RandomSource &rng) const {
    Vector4 z;
    for (int i = 0; i < 4; ++i)
        z(i) = rng.normal();
    return transform(z);
}

Vector4 sample_mvn(const Vector4 &mu, const Matrix4 &sigma, RandomSource &rng) {
    return MvnSampler(mu, sigma)(rng);
}

} // namespace atmochan
