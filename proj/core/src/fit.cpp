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
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace atmochan {

namespace {

constexpr double kPenalty = 1e30;

using Point = std::array<double, 3>; // normalized (rytov, xi, chi) in [0, 1]^3

class Objective {
public:
    Objective(const Histogram &measured, const ChannelGeometry &geometry, const ParameterBox &box,
              std::uint64_t seed, const FitOptions &options)
        : measured_(measured), geometry_(geometry), box_(box), seed_(seed), options_(options) {}

    std::size_t evaluations() const noexcept { return evaluations_; }
    bool exhausted() const noexcept { return evaluations_ >= options_.budget; }

    double rytov(const Point &p) const { return box_.rytov_lo + p[0] * (box_.rytov_hi - box_.rytov_lo); }
    double xi(const Point &p) const { return box_.xi_lo + p[1] * (box_.xi_hi - box_.xi_lo); }
    double chi(const Point &p) const { return box_.chi_lo + p[2] * (box_.chi_hi - box_.chi_lo); }
    double chi_to_unit(double chi) const {
        return std::clamp((chi - box_.chi_lo) / (box_.chi_hi - box_.chi_lo), 0.0, 1.0);
    }

    // Ensemble at chi_ext = 1 for (rytov, xi); the last one is cached since
    // chi-only moves just rescale it.
    const std::vector<double> *geometric_ensemble(double rytov, double xi) {
        if (cached_ && rytov == cached_rytov_ && xi == cached_xi_)
            return cached_valid_ ? &cache_ : nullptr;
        cached_ = true;
        cached_rytov_ = rytov;
        cached_xi_ = xi;
        try {
            const ChannelStatistics stats = statistics_from_triplet(geometry_, rytov, xi, 1.0);
            cache_ = sample_ensemble(stats, geometry_, options_.samples_per_eval, seed_, options_.sampling).samples;
            cached_valid_ = true;
        } catch (const StatisticsError &) {
            cached_valid_ = false;
        }
        return cached_valid_ ? &cache_ : nullptr;
    }

    Chi2Result evaluate(const Point &p) {
        ++evaluations_;
        const std::vector<double> *base = geometric_ensemble(rytov(p), xi(p));
        if (!base)
            return {kPenalty, 0, 0};
        const double c = chi(p);
        scaled_.resize(base->size());
        std::transform(base->begin(), base->end(), scaled_.begin(), [c](double eta) { return c * eta; });
        return chi2_test(scaled_, measured_);
    }

    double mean_of(const std::vector<double> &values) const {
        return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    }

private:
    const Histogram &measured_;
    const ChannelGeometry &geometry_;
    const ParameterBox &box_;
    std::uint64_t seed_;
    const FitOptions &options_;
    std::size_t evaluations_ = 0;

    bool cached_ = false;
    bool cached_valid_ = false;
    double cached_rytov_ = 0.0;
    double cached_xi_ = 0.0;
    std::vector<double> cache_;
    std::vector<double> scaled_;
};

double histogram_mean(const Histogram &h) {
    double sum = 0.0;
    for (std::size_t i = 0; i < h.bins(); ++i)
        sum += h.counts[i] * 0.5 * (h.edges[i] + h.edges[i + 1]);
    return sum / h.total();
}

Point clamp_unit(Point p) {
    for (double &x : p)
        x = std::clamp(x, 0.0, 1.0);
    return p;
}

} // namespace

void ParameterBox::validate() const {
    auto check = [](double lo, double hi, double min_lo, bool open_lo, double max_hi, const char *name) {
        const bool lo_ok = open_lo ? lo > min_lo : lo >= min_lo;
        if (!std::isfinite(lo) || !std::isfinite(hi) || !lo_ok || hi > max_hi || !(hi > lo)) {
            std::ostringstream msg;
            msg << "fit bounds for " << name << " are invalid: [" << lo << ", " << hi << "]";
            throw DomainError(msg.str());
        }
    };
    check(rytov_lo, rytov_hi, 0.0, true, 10.0, "rytov_sq");
    check(xi_lo, xi_hi, 0.0, false, 50.0, "xi_divergence");
    check(chi_lo, chi_hi, 0.0, true, 1.0, "chi_ext");
}

FitResult fit_channel(const Histogram &measured, const ChannelGeometry &geometry, const ParameterBox &bounds,
                      std::uint64_t seed, const FitOptions &options) {
    measured.validate();
    if (!(measured.total() > 0.0))
        throw DomainError("fit_channel: measured histogram is empty");
    bounds.validate();
    geometry.validate();
    if (options.grid_rytov == 0 || options.grid_xi == 0)
        throw DomainError("fit_channel: grid dimensions must be positive");

    Objective objective(measured, geometry, bounds, seed, options);
    const double measured_mean = histogram_mean(measured);

    Point best{};
    Chi2Result best_result{std::numeric_limits<double>::infinity(), 0, 0};
    auto consider = [&](const Point &p, const Chi2Result &r) {
        if (r.statistic < best_result.statistic) {
            best = p;
            best_result = r;
        }
    };

    // coarse grid; chi_ext follows from matching the mean transmittance
    const std::size_t grid_total = options.grid_rytov * options.grid_xi;
    std::size_t done = 0;
    for (std::size_t i = 0; i < options.grid_rytov; ++i) {
        for (std::size_t j = 0; j < options.grid_xi; ++j) {
            if (objective.exhausted()) {
                std::ostringstream msg;
                msg << "fit budget of " << options.budget << " evaluations exhausted after " << done << " of "
                    << grid_total << " coarse grid points ("
                    << 100.0 * static_cast<double>(done) / static_cast<double>(grid_total) << "% complete)";
                throw BudgetExhaustedError(msg.str(), static_cast<double>(done) / static_cast<double>(grid_total));
            }
            Point p{(static_cast<double>(i) + 0.5) / static_cast<double>(options.grid_rytov),
                    (static_cast<double>(j) + 0.5) / static_cast<double>(options.grid_xi), 1.0};
            const std::vector<double> *base = objective.geometric_ensemble(objective.rytov(p), objective.xi(p));
            if (base) {
                const double model_mean = objective.mean_of(*base);
                p[2] = objective.chi_to_unit(model_mean > 0.0 ? measured_mean / model_mean : bounds.chi_hi);
            }
            consider(p, objective.evaluate(p));
            ++done;
        }
    }

    // Nelder-Mead in the unit cube, restarted around the incumbent while
    // budget remains
    const Point step{0.5 / static_cast<double>(options.grid_rytov), 0.5 / static_cast<double>(options.grid_xi), 0.05};
    for (int restart = 0; restart < 3 && !objective.exhausted(); ++restart) {
        const double shrink_step = restart == 0 ? 1.0 : 0.5;
        std::array<Point, 4> simplex;
        std::array<double, 4> values;
        simplex[0] = best;
        values[0] = best_result.statistic;
        for (int k = 0; k < 3 && !objective.exhausted(); ++k) {
            Point p = best;
            const double s = step[static_cast<std::size_t>(k)] * shrink_step;
            p[static_cast<std::size_t>(k)] += (p[static_cast<std::size_t>(k)] + s <= 1.0) ? s : -s;
            simplex[static_cast<std::size_t>(k) + 1] = clamp_unit(p);
            const Chi2Result r = objective.evaluate(simplex[static_cast<std::size_t>(k) + 1]);
            values[static_cast<std::size_t>(k) + 1] = r.statistic;
            consider(simplex[static_cast<std::size_t>(k) + 1], r);
        }
        if (objective.exhausted())
            break;

        auto eval = [&](const Point &p) {
            const Chi2Result r = objective.evaluate(p);
            consider(p, r);
            return r.statistic;
        };

        while (!objective.exhausted()) {
            std::array<std::size_t, 4> order{0, 1, 2, 3};
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
            std::array<Point, 4> s2;
            std::array<double, 4> v2;
            for (std::size_t k = 0; k < 4; ++k) {
                s2[k] = simplex[order[k]];
                v2[k] = values[order[k]];
            }
            simplex = s2;
            values = v2;

            double diameter = 0.0;
            for (std::size_t k = 1; k < 4; ++k)
                for (std::size_t d = 0; d < 3; ++d)
                    diameter = std::max(diameter, std::abs(simplex[k][d] - simplex[0][d]));
            if (diameter < 1e-4 || values[3] - values[0] < 1e-9 * (1.0 + values[0]))
                break;

            Point centroid{};
            for (std::size_t k = 0; k < 3; ++k)
                for (std::size_t d = 0; d < 3; ++d)
                    centroid[d] += simplex[k][d] / 3.0;
            auto along = [&](double t) {
                Point p;
                for (std::size_t d = 0; d < 3; ++d)
                    p[d] = centroid[d] + t * (simplex[3][d] - centroid[d]);
                return clamp_unit(p);
            };

            const Point reflected = along(-1.0);
            const double fr = eval(reflected);
            if (fr < values[0]) {
                if (objective.exhausted()) {
                    simplex[3] = reflected;
                    values[3] = fr;
                    break;
                }
                const Point expanded = along(-2.0);
                const double fe = eval(expanded);
                if (fe < fr) {
                    simplex[3] = expanded;
                    values[3] = fe;
                } else {
                    simplex[3] = reflected;
                    values[3] = fr;
                }
            } else if (fr < values[2]) {
                simplex[3] = reflected;
                values[3] = fr;
            } else {
                if (objective.exhausted())
                    break;
                const bool outside = fr < values[3];
                const Point contracted = along(outside ? -0.5 : 0.5);
                const double fc = eval(contracted);
                if (fc < std::min(fr, values[3])) {
                    simplex[3] = contracted;
                    values[3] = fc;
                } else {
                    for (std::size_t k = 1; k < 4 && !objective.exhausted(); ++k) {
                        for (std::size_t d = 0; d < 3; ++d)
                            simplex[k][d] = simplex[0][d] + 0.5 * (simplex[k][d] - simplex[0][d]);
                        values[k] = eval(simplex[k]);
                    }
                }
            }
        }
    }

    FitResult result;
    result.rytov_sq = objective.rytov(best);
    result.xi_divergence = objective.xi(best);
    result.chi_ext = objective.chi(best);
    result.chi2_statistic = best_result.statistic;
    result.dof = best_result.groups > 4 ? best_result.groups - 4 : 0;
    result.n_eval = objective.evaluations();
    return result;
}

} // namespace atmochan
