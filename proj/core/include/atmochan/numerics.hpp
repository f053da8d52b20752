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

#include <Eigen/Core>

#include <cstdint>

namespace atmochan {

using Vector4 = Eigen::Matrix<double, 4, 1>;
using Matrix4 = Eigen::Matrix<double, 4, 4>;

// ---------------------------------------------------------------------------
// Modified Bessel functions of the first kind, orders 0 and 1, for x >= 0.
//
// Power series below `kBesselAsymptoticSwitch`, Hankel asymptotic expansion
// above it. Relative error is below 1e-12 on [0, 700]. The `_scaled` variants
// return exp(-x) * I_n(x) and stay finite for any finite x.
// ---------------------------------------------------------------------------
inline constexpr double kBesselAsymptoticSwitch = 30.0;

double bessel_i0(double x);
double bessel_i1(double x);
double bessel_i0_scaled(double x);
double bessel_i1_scaled(double x);

// Principal branch of the Lambert W function, w * exp(w) = x, for x >= 0.
double lambert_w0(double x);

// W0(exp(y)) evaluated without forming exp(y); valid for any finite y.
double lambert_w0_exp(double y);

// ---------------------------------------------------------------------------
// Random numbers
// ---------------------------------------------------------------------------

// Deterministic generator keyed by (seed, stream_id). Each stream is seeded
// independently through a SplitMix64 mixer, so parallel chunks can own one
// stream each and the sample sequence never depends on scheduling.
class RandomSource {
public:
    RandomSource(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }

    std::uint64_t next_u64() noexcept;
    // Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept;
    // Standard normal (Marsaglia polar method).
    double normal() noexcept;

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t state_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Draws from N(mu, sigma). The symmetric square root of sigma is computed
// once at construction; eigenvalues in [-1e-10, 0) are clamped to zero.
class MvnSampler {
public:
    static constexpr double kSymmetryTolerance = 1e-12;
    static constexpr double kEigenvalueTolerance = -1e-10;

    MvnSampler(const Vector4 &mu, const Matrix4 &sigma);

    Vector4 operator()(RandomSource &rng) const;
    // Maps a vector of independent standard normals to the target law.
    Vector4 transform(const Vector4 &z) const { return mu_ + root_ * z; }

    const Vector4 &mean() const noexcept { return mu_; }
    const Matrix4 &root() const noexcept { return root_; }

private:
    Vector4 mu_;
    Matrix4 root_;
};

Vector4 sample_mvn(const Vector4 &mu, const Matrix4 &sigma, RandomSource &rng);

} // namespace atmochan
