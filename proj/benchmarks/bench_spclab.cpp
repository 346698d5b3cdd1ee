#include <benchmark/benchmark.h>

#include "spclab/ins.hpp"
#include "spclab/modes.hpp"
#include "spclab/relax.hpp"
#include "spclab/spc.hpp"
#include "spclab/synth.hpp"
#include "spclab/thermal.hpp"

using namespace spclab;

namespace {

const SpectrumSet& two_band() {
    static const SpectrumSet set = synth::generate_spectrum_set(synth::two_band_spec(0));
    return set;
}

const spc::LambdaProfile table{{0.0, 185.0, 600.0}, {0.068, 127.0}, {}};

relax::RateSeries rates(double noise) {
    return synth::generate_rate_series(table, two_band(), synth::log_spaced_temperatures(10, 300, 20), noise, 1);
}

void BM_TwoPhononFactor(benchmark::State& st) {
    double T = 20.0;
    for (auto _ : st) {
        benchmark::DoNotOptimize(thermal::two_phonon_factor(42.5, T));
        T = T < 300.0 ? T + 0.1 : 20.0;
    }
}
BENCHMARK(BM_TwoPhononFactor);

void BM_ForwardRate(benchmark::State& st) {
    const auto& set = two_band();
    for (auto _ : st) benchmark::DoNotOptimize(spc::forward_rate(table, set, 42.0));
}
BENCHMARK(BM_ForwardRate);

void BM_FitLambdaWindows(benchmark::State& st) {
    const auto s = rates(0.05);
    for (auto _ : st) benchmark::DoNotOptimize(spc::fit_lambda_windows(s, two_band(), table.edges_cm));
}
BENCHMARK(BM_FitLambdaWindows)->Unit(benchmark::kMillisecond);

void BM_CutoffScan(benchmark::State& st) {
    const auto s = rates(0.0);
    for (auto _ : st) benchmark::DoNotOptimize(spc::cutoff_scan({s}, two_band(), spc::default_cutoff_grid()));
}
BENCHMARK(BM_CutoffScan)->Unit(benchmark::kMillisecond);

void BM_CorrectionPipeline(benchmark::State& st) {
    std::vector<Spectrum> raw;
    for (const auto& s : two_band().spectra()) {
        auto r = s;
        r.provenance = Provenance::raw;
        raw.push_back(r);
    }
    const SpectrumSet set(raw);
    const ins::CorrectionConfig cfg;
    for (auto _ : st) benchmark::DoNotOptimize(ins::correct(set, cfg));
}
BENCHMARK(BM_CorrectionPipeline)->Unit(benchmark::kMillisecond);

void BM_FitLocalModes(benchmark::State& st) {
    const auto s = synth::generate_local_mode_series(1e-3, {{2.0, 42.5}, {400.0, 264.8}},
                                                     synth::log_spaced_temperatures(5, 300, 30), 0.05, 2);
    for (auto _ : st) benchmark::DoNotOptimize(relax::fit_local_modes(s));
}
BENCHMARK(BM_FitLocalModes)->Unit(benchmark::kMillisecond);

void BM_TransportIntegral8(benchmark::State& st) {
    for (auto _ : st) benchmark::DoNotOptimize(relax::transport_integral_8(static_cast<double>(st.range(0))));
}
BENCHMARK(BM_TransportIntegral8)->Arg(1)->Arg(10)->Arg(100);

void BM_RmsdPerAtom(benchmark::State& st) {
    const auto ms = synth::planar_core_mode_set();
    for (auto _ : st) benchmark::DoNotOptimize(modes::rmsd_per_atom(ms, 150.0, 600.0));
}
BENCHMARK(BM_RmsdPerAtom);

} // namespace

BENCHMARK_MAIN();
