#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "irssim/impairments.hpp"
#include "irssim/model.hpp"
#include "irssim/rng.hpp"

using namespace irssim;

namespace {

Scenario bench_scenario() {
    Scenario s;
    s.irs_geometry.n_rows = 16;
    s.irs_geometry.n_cols = 16;
    s.irs_geometry.element_reflectance = 13000.0;
    s.antenna_distance = 1.0;
    s.antenna_offset_y = 0.16;
    s.static_paths = {{{0.045, 0.03}, 1.013}, {{0.05, -0.04}, 1.041}, {{0.04, 0.02}, 1.067}};
    s.breath_path.a0 = {3e-4, 0.0};
    s.breath_path.d0 = 2.8;
    s.si = {0.01, 0.3};
    return s;
}

std::vector<double> chest(std::size_t n, double rate) {
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i)
        d[i] = 0.015 * (1.0 - std::cos(kTwoPi * 0.25 * double(i) / rate)) / 2.0;
    return d;
}

ImpairmentParams imp() {
    ImpairmentParams p;
    p.jitter_std = 15.0 * kPi / 180.0;
    return p;
}

void bench_stream_serial(benchmark::State& st) {
    Scenario s = bench_scenario();
    IrsState state(16, 16);
    std::vector<double> d = chest(std::size_t(st.range(0)), 400.0);
    RngStream rng(7);
    for (auto _ : st) {
        auto out = synthesize_csi_stream_serial(s, state, d, 400.0, imp(), QuantizerConfig{}, rng);
        benchmark::DoNotOptimize(out.data());
    }
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

void bench_stream_parallel(benchmark::State& st) {
    Scenario s = bench_scenario();
    IrsState state(16, 16);
    std::vector<double> d = chest(std::size_t(st.range(0)), 400.0);
    RngStream rng(7);
    for (auto _ : st) {
        auto out = synthesize_csi_stream(s, state, d, 400.0, imp(), QuantizerConfig{}, rng);
        benchmark::DoNotOptimize(out.data());
    }
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

} // namespace

BENCHMARK(bench_stream_serial)->Arg(2000)->Arg(8000)->Unit(benchmark::kMillisecond);
BENCHMARK(bench_stream_parallel)->Arg(2000)->Arg(8000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
