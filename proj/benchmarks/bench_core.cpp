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
#include "atmochan/pdt_engine.hpp"
#include "atmochan/quantum_layer.hpp"

#include <benchmark/benchmark.h>

using namespace atmochan;

namespace {

const ChannelGeometry kGeometry{};

void BM_Transmittance(benchmark::State &state) {
    const BeamSample s{0.012, -0.004, 2.5, 2.2, 0.7};
    for (auto _ : state)
        benchmark::DoNotOptimize(transmittance(s, kGeometry));
}
BENCHMARK(BM_Transmittance);

void BM_ShapeScale(benchmark::State &state) {
    double xi = 10.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(shape_and_scale(xi, kGeometry.aperture_radius));
        xi = xi > 40.0 ? 10.0 : xi + 0.1;
    }
}
BENCHMARK(BM_ShapeScale);

void BM_SampleEnsemble(benchmark::State &state) {
    const ChannelStatistics stats = statistics_from_triplet(kGeometry, 1.78, 5.0, 0.51);
    const auto n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state)
        benchmark::DoNotOptimize(sample_ensemble(stats, kGeometry, n, 1, {1}));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SampleEnsemble)->Arg(1 << 14)->Arg(1 << 17)->Unit(benchmark::kMillisecond);

void BM_EstimateDensity(benchmark::State &state) {
    const auto e = sample_ensemble(statistics_from_triplet(kGeometry, 1.78, 5.0, 0.51), kGeometry,
                                   static_cast<std::size_t>(state.range(0)), 1);
    for (auto _ : state)
        benchmark::DoNotOptimize(estimate_density(e, 512));
}
BENCHMARK(BM_EstimateDensity)->Arg(100000)->Arg(1000000)->Unit(benchmark::kMillisecond);

void BM_Chi2(benchmark::State &state) {
    const auto model = sample_ensemble(statistics_from_triplet(kGeometry, 1.78, 5.0, 0.51), kGeometry, 100000, 1);
    const auto data = sample_ensemble(statistics_from_triplet(kGeometry, 1.78, 5.0, 0.51), kGeometry, 100000, 2);
    const Histogram h = Histogram::from_samples(data.samples);
    for (auto _ : state)
        benchmark::DoNotOptimize(chi2_test(model.samples, h));
}
BENCHMARK(BM_Chi2)->Unit(benchmark::kMicrosecond);

void BM_EntanglementRegion(benchmark::State &state) {
    ChannelMoments m;
    m.mean_eta = 0.357;
    m.mean_sqrt_eta = 0.597;
    std::vector<double> xs(81), ds(321);
    for (std::size_t i = 0; i < xs.size(); ++i)
        xs[i] = 0.025 * static_cast<double>(i);
    for (std::size_t j = 0; j < ds.size(); ++j)
        ds[j] = 0.25 * static_cast<double>(j);
    for (auto _ : state)
        benchmark::DoNotOptimize(entanglement_region(m, xs, ds));
}
BENCHMARK(BM_EntanglementRegion)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
