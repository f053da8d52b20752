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

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include "atmochan/beam_model.hpp"
#include "atmochan/channel_stats.hpp"
#include "atmochan/errors.hpp"
#include "atmochan/pdt_engine.hpp"
#include "atmochan/quantum_layer.hpp"

#include "cli/app.hpp"
#include "cli/csv_io.hpp"

#include "support/oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace atmochan;
namespace fs = std::filesystem;

namespace {

// ---- pinned tolerances ------------------------------------------------------
constexpr std::size_t kReportSamples = 1000000;
constexpr double kMeanTolerance = 0.05;          // absolute, criterion 1
constexpr double kChannelSeconds = 60.0;         // per channel, criterion 1
constexpr double kRainChi = 0.425;               // criterion 2
constexpr double kRainChiTolerance = 0.01;
constexpr double kDensityNormTolerance = 0.02;   // criterion 3
constexpr std::size_t kOracleRealizations = 1000; // criterion 4
constexpr double kOracleTolerance = 0.05;        // absolute transmittance
constexpr double kCircularTolerance = 1e-10;
constexpr double kRoundTripTolerance = 1e-10;    // relative, criterion 5
constexpr double kFitRelTolerance = 0.15;        // criterion 6
constexpr double kFitSmallXiTolerance = 0.3;     // absolute, when Xi is small
constexpr std::size_t kFitBudget = 500;
constexpr double kFitSeconds = 600.0;
constexpr std::size_t kFitMeasuredSamples = 100000;
constexpr double kInputDb = -2.4;                // criterion 7
constexpr double kEtaOpt = 0.88;
constexpr double kEtaDet = 0.9;
constexpr double kMonotoneSigmas = 3.0;
constexpr double kOracleSigmas = 3.0;            // criterion 8
constexpr int kOracleTriples = 20;
constexpr double kXiProbe = 0.5;

struct Channel {
    const char *name;
    double rytov_sq;
    double xi;
    double chi;
    double reference_mean;
};

const Channel kChannels[3] = {
    {"night xi=5", 1.78, 5.0, 0.51, 0.36},
    {"night xi=12", 1.05, 12.0, 0.40, 0.26},
    {"rain xi=0.2", 2.88, 0.2, 0.43, 0.29},
};

int g_failures = 0;

void report(int id, bool ok, const std::string &what, const std::string &detail) {
    std::printf("%s criterion %d: %s | %s\n", ok ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok)
        ++g_failures;
}

std::string fmt(const char *f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const ChannelGeometry kGeometry{};
constexpr double kDeterministic = kEtaOpt * kEtaDet;

std::vector<TransmittanceEnsemble> g_ensembles;

// ---- 1 ------------------------------------------------------------------------
void mean_transmittance() {
    bool ok = true;
    std::string detail;
    for (std::size_t c = 0; c < 3; ++c) {
        const Channel &ch = kChannels[c];
        const auto t0 = std::chrono::steady_clock::now();
        g_ensembles.push_back(
            sample_ensemble(statistics_from_triplet(kGeometry, ch.rytov_sq, ch.xi, ch.chi), kGeometry, kReportSamples, 1));
        const double mean = estimate_moment(g_ensembles.back(), [](double e) { return e; }).value;
        const double secs = seconds_since(t0);
        // the reference means include the optical and detection efficiencies
        const double with_optics = kDeterministic * mean;
        ok &= std::abs(with_optics - ch.reference_mean) <= kMeanTolerance && secs <= kChannelSeconds;
        detail += fmt("%s: <eta>=%.4f, x0.792=%.4f vs %.2f (%.1fs); ", ch.name, mean, with_optics, ch.reference_mean, secs);
    }
    report(1, ok, "mean transmittance of the three fitted channels within 0.05", detail);
}

// ---- 2 ------------------------------------------------------------------------
void rain_extinction() {
    ExtinctionSpec e;
    e.molecular = 0.94;
    e.rain_rate = 3.2;
    const double chi = extinction_factor(e, 1600.0);
    report(2, std::abs(chi - kRainChi) <= kRainChiTolerance, "rain extinction factor 0.425 +- 0.01",
           fmt("chi_ext=%.5f", chi));
}

// ---- 3 ------------------------------------------------------------------------
void pdt_shape() {
    bool ok = true;
    std::string detail;
    double skew[3];
    for (std::size_t c = 0; c < 3; ++c) {
        const DensityEstimate d = estimate_density(g_ensembles[c], 512);
        const double integral = d.integral();
        const bool nonneg = std::all_of(d.density.begin(), d.density.end(), [](double v) { return v >= 0.0; });
        const bool support = d.grid.front() >= 0.0 && d.grid.back() <= 1.0;
        ok &= std::abs(integral - 1.0) <= kDensityNormTolerance && nonneg && support;
        skew[c] = sample_skewness(g_ensembles[c].view());
        detail += fmt("%s: int=%.4f skew=%.3f; ", kChannels[c].name, integral, skew[c]);
    }
    const bool ordered = std::abs(skew[1]) < std::abs(skew[0]);
    report(3, ok && ordered, "normalized non-negative densities; xi=12 more symmetric than xi=5", detail);
}

// ---- 4 ------------------------------------------------------------------------
void aperture_oracle() {
    std::vector<MvnSampler> samplers;
    for (const auto &c : kChannels) {
        const auto s = statistics_from_triplet(kGeometry, c.rytov_sq, c.xi, 1.0);
        samplers.emplace_back(s.mu, s.sigma);
    }
    RandomSource rng(4, 0);
    double worst = 0.0;
    for (std::size_t k = 0; k < kOracleRealizations; ++k) {
        const Vector4 v = samplers[k % 3](rng);
        const BeamSample s{v[0], v[1], v[2], v[3], 0.5 * std::numbers::pi * rng.uniform()};
        const double w0 = kGeometry.beam_waist_w0;
        const double disk = oracle::disk_integral(s.w1_sq(w0), s.w2_sq(w0), s.phi, s.x0, s.y0, kGeometry.aperture_radius);
        worst = std::max(worst, std::abs(transmittance(s, kGeometry) - disk));
    }
    double worst_circ = 0.0;
    for (double w_sq : {1e-4, 1e-3, 4.454e-3, 1e-2, 5e-2}) {
        const double theta = std::log(w_sq / (kGeometry.beam_waist_w0 * kGeometry.beam_waist_w0));
        const double disk = oracle::disk_integral(w_sq, w_sq, 0.0, 0.0, 0.0, kGeometry.aperture_radius);
        worst_circ = std::max(worst_circ, std::abs(transmittance({0.0, 0.0, theta, theta, 0.0}, kGeometry) - disk));
    }
    report(4, worst <= kOracleTolerance && worst_circ <= kCircularTolerance,
           "elliptic-beam transmittance vs disk integration (1000 channel realizations)",
           fmt("max |diff|=%.4f, circular max |diff|=%.2e", worst, worst_circ));
}

// ---- 5 ------------------------------------------------------------------------
void lognormal_round_trip() {
    double worst = 0.0;
    const double w0 = kGeometry.beam_waist_w0, omega = kGeometry.fresnel_number();
    for (double s = 0.1; s <= 5.0 + 1e-9; s += 0.1)
        for (double x = 0.0; x <= 20.0 + 1e-9; x += 0.5) {
            const SpotMoments m = spot_moments(w0, omega, s, x);
            const ThetaStatistics t = theta_statistics(m, w0);
            for (int i = 0; i < 2; ++i) {
                const double mean = w0 * w0 * std::exp(t.mean[i] + 0.5 * t.cov(i, i));
                worst = std::max(worst, std::abs(mean / m.mean_w_sq - 1.0));
                for (int j = 0; j < 2; ++j) {
                    const double cov = m.mean_w_sq * m.mean_w_sq * std::expm1(t.cov(i, j));
                    worst = std::max(worst, std::abs(cov / m.cov_w_sq(i, j) - 1.0));
                }
            }
        }
    report(5, worst <= kRoundTripTolerance, "log-normal moment matching round trip on [0.1,5]x[0,20]",
           fmt("max relative error=%.2e", worst));
}

// ---- 6 ------------------------------------------------------------------------
void fit_recovery() {
    bool ok = true;
    std::string detail;
    for (std::size_t c = 0; c < 3; ++c) {
        const Channel &ch = kChannels[c];
        const auto data = sample_ensemble(statistics_from_triplet(kGeometry, ch.rytov_sq, ch.xi, ch.chi), kGeometry,
                                          kFitMeasuredSamples, 1000 + c);
        FitOptions opt;
        opt.budget = kFitBudget;
        const auto t0 = std::chrono::steady_clock::now();
        const FitResult r = fit_channel(Histogram::from_samples(data.samples), kGeometry, ParameterBox{}, 7, opt);
        const double secs = seconds_since(t0);
        auto close = [](double got, double want) { return std::abs(got - want) <= kFitRelTolerance * want; };
        const bool xi_ok = ch.xi < 1.0 ? std::abs(r.xi_divergence - ch.xi) <= kFitSmallXiTolerance : close(r.xi_divergence, ch.xi);
        ok &= close(r.rytov_sq, ch.rytov_sq) && xi_ok && close(r.chi_ext, ch.chi) && r.n_eval <= kFitBudget &&
              secs <= kFitSeconds;
        detail += fmt("%s -> (%.3f, %.3f, %.3f) in %zu evals %.0fs; ", ch.name, r.rytov_sq, r.xi_divergence, r.chi_ext,
                      r.n_eval, secs);
    }
    report(6, ok, "fit recovers synthetic triplets within 15% (xi=0.2: +-0.3)", detail);
}

// ---- 7 ------------------------------------------------------------------------
void squeezing() {
    std::vector<double> thresholds;
    for (int i = 0; i <= 60; ++i)
        thresholds.push_back(0.01 * i);
    std::vector<SqueezingCurve> curves;
    bool ok = true;
    std::string detail;
    for (std::size_t c = 0; c < 3; ++c) {
        curves.push_back(squeezing_vs_threshold(kInputDb, g_ensembles[c].view(), thresholds, kDeterministic));
        const auto &pts = curves.back().points;
        ok &= !pts.empty() && pts.front().output_db < 0.0;
        std::size_t violations = 0;
        for (std::size_t i = 1; i < pts.size(); ++i) {
            const double sem = std::hypot(pts[i].output_db_sem, pts[i - 1].output_db_sem);
            if (pts[i].output_db > pts[i - 1].output_db + kMonotoneSigmas * sem)
                ++violations;
        }
        ok &= violations == 0;
        detail += fmt("%s: %.3f dB at eta_min=0, %zu points; ", kChannels[c].name, pts.front().output_db, pts.size());
    }
    // rain keeps more squeezing than the xi=12 haze channel wherever both exist
    const auto &rain = curves[2].points, &haze = curves[1].points;
    std::size_t matched = std::min(rain.size(), haze.size()), wins = 0;
    for (std::size_t i = 0; i < matched; ++i)
        wins += rain[i].output_db < haze[i].output_db;
    ok &= matched > 0 && wins == matched;
    detail += fmt("rain below haze at %zu/%zu thresholds", wins, matched);
    report(7, ok, "squeezing survives, monotone in eta_min, rain above xi=12 haze", detail);
}

// ---- 8 ------------------------------------------------------------------------
void entanglement() {
    std::vector<double> xs, ds;
    for (int i = 0; i <= 80; ++i)
        xs.push_back(0.025 * i);
    for (int j = 0; j <= 320; ++j)
        ds.push_back(0.25 * j);
    bool contours = true, xi0 = true;
    double boundary[3];
    std::string detail;
    for (std::size_t c = 0; c < 3; ++c) {
        const ChannelMoments m = channel_moments(g_ensembles[c], 0.0, kDeterministic);
        const EntanglementRegion r = entanglement_region(m, xs, ds);
        const bool finite = std::any_of(r.contour.begin(), r.contour.end(), [](auto p) { return p.first > 0.0 && p.second > 0.0; });
        contours &= finite;
        for (std::size_t j = 0; j < ds.size(); ++j)
            xi0 &= r.w(0, j) >= 0.0;
        boundary[c] = boundary_displacement(m, kXiProbe, 1e4);
        detail += fmt("%s: d*(0.5)=%.2f; ", kChannels[c].name, boundary[c]);
    }

    // analytic central moments vs averaging over independent draws
    std::size_t agree = 0;
    RandomSource rng(88, 0);
    for (int k = 0; k < kOracleTriples; ++k) {
        const std::size_t c = k % 3;
        const Channel &ch = kChannels[c];
        const double xi = 2.0 * rng.uniform();
        const double d = 8.0 * rng.uniform();
        const ChannelMoments m = channel_moments(g_ensembles[c], 0.0, kDeterministic);
        const MomentMatrix v = tmsv_moment_matrix({xi, {d, 0.0}}, m);
        const auto draws = sample_ensemble(statistics_from_triplet(kGeometry, ch.rytov_sq, ch.xi, ch.chi), kGeometry,
                                           200000, 500 + k);
        const double sh2 = std::sinh(xi) * std::sinh(xi);
        double s_n = 0, s_n2 = 0, s_r = 0, s_r2 = 0;
        for (double e0 : draws.samples) {
            const double e = kDeterministic * e0;
            const double raw = e * (sh2 + d * d); // <a^dag a> for this eta
            s_n += raw;
            s_n2 += raw * raw;
            s_r += std::sqrt(e);
            s_r2 += e;
        }
        const double n = static_cast<double>(draws.size());
        const double mean_raw = s_n / n, mean_root = s_r / n;
        const double brute = mean_raw - mean_root * mean_root * d * d;
        const double se = std::sqrt((s_n2 / n - mean_raw * mean_raw) / n) +
                          2.0 * mean_root * d * d * std::sqrt((s_r2 / n - mean_root * mean_root) / n);
        const double se_cross = std::sqrt((s_r2 / n - mean_root * mean_root) / n) * std::sinh(xi) * std::cosh(xi);
        const bool ok_n = std::abs(v(0, 0).real() - brute) <= kOracleSigmas * std::numbers::sqrt2 * se;
        const bool ok_c = std::abs(v(1, 2).real() - mean_root * std::sinh(xi) * std::cosh(xi)) <=
                          kOracleSigmas * std::numbers::sqrt2 * se_cross + 1e-15;
        agree += ok_n && ok_c;
    }
    detail += fmt("moment oracle %zu/%d", agree, kOracleTriples);
    const bool shrink = boundary[1] < boundary[0];
    if (!shrink)
        detail += "; xi=12 boundary is not below xi=5 (the boundary scales with <sqrt eta>^2/Var(sqrt eta), "
                  "which is larger for the xi=12 channel)";
    report(8, contours && xi0 && shrink && agree == static_cast<std::size_t>(kOracleTriples),
           "finite contours, no entanglement at xi=0, xi=12 boundary below xi=5, moment oracle", detail);
}

// ---- 9 ------------------------------------------------------------------------
std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void determinism(const fs::path &config) {
    const fs::path root = fs::temp_directory_path() / "atmochan_acceptance_determinism";
    fs::remove_all(root);
    bool ok = true;
    std::size_t files = 0;
    for (const char *wf : {"simulate-pdt", "squeezing", "entanglement"}) {
        for (const char *tag : {"t1", "t4", "t1b"}) {
            const std::string threads = tag[1] == '4' ? "4" : "1";
            const std::string out = (root / tag).string();
            const char *argv[] = {"atmochan", wf, "--config", config.c_str(), "--out-dir", out.c_str(),
                                  "--threads", threads.c_str(), "--seed", "2016"};
            std::ostringstream o, e;
            ok &= cli::run_cli(10, argv, o, e) == 0;
        }
    }
    for (const auto &entry : fs::directory_iterator(root / "t1")) {
        const std::string a = slurp(entry.path());
        ok &= a == slurp(root / "t4" / entry.path().filename()) && a == slurp(root / "t1b" / entry.path().filename());
        ++files;
    }
    ok &= files > 0;
    report(9, ok, "byte-identical outputs across reruns and thread counts", fmt("%zu files compared", files));
    fs::remove_all(root);
}

void guarded(int id, const std::function<void()> &fn) {
    try {
        fn();
    } catch (const std::exception &e) {
        report(id, false, "raised an exception", e.what());
    }
}

} // namespace

int main(int argc, char **argv) {
    const fs::path config = argc > 1 ? fs::path(argv[1]) : fs::path(ATMOCHAN_DEFAULT_CONFIG);
    guarded(1, mean_transmittance);
    guarded(2, rain_extinction);
    if (g_ensembles.size() == 3) {
        guarded(3, pdt_shape);
    } else {
        report(3, false, "skipped", "channel ensembles unavailable");
    }
    guarded(4, aperture_oracle);
    guarded(5, lognormal_round_trip);
    guarded(6, fit_recovery);
    if (g_ensembles.size() == 3) {
        guarded(7, squeezing);
        guarded(8, entanglement);
    } else {
        report(7, false, "skipped", "channel ensembles unavailable");
        report(8, false, "skipped", "channel ensembles unavailable");
    }
    guarded(9, [&] { determinism(config); });
    std::printf("%d of 9 criteria failed\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
