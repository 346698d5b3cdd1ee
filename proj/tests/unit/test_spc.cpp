#include <gtest/gtest.h>

#include <cmath>

#include "spclab/ins.hpp"
#include "spclab/spc.hpp"
#include "spclab/synth.hpp"
#include "spclab/thermal.hpp"

using namespace spclab;

namespace {

// Unit mass in the bin [99.5, 100.5] on a 1 cm^-1 grid, same at every T.
SpectrumSet delta_set(double e0 = 100.0, std::vector<double> temps = {1.0, 1000.0}) {
    const auto g = EnergyGrid::uniform(0.5, 700.5, 700);
    std::vector<Spectrum> v;
    for (double T : temps) {
        Spectrum s{g, std::vector<double>(700, 0.0), T};
        s.intensity[static_cast<std::size_t>(e0) - 1] = 1.0;
        v.push_back(s);
    }
    return SpectrumSet(v);
}

const SpectrumSet& two_band() {
    static const SpectrumSet s = synth::generate_spectrum_set(synth::two_band_spec());
    return s;
}

spc::LambdaProfile table_profile() { return {{0.0, 185.0, 600.0}, {0.068, 127.0}, std::nullopt}; }

} // namespace

TEST(LambdaProfile, Validation) {
    EXPECT_NO_THROW(table_profile().validate());
    EXPECT_THROW((spc::LambdaProfile{{0, 100}, {1, 2}, {}}).validate(), ValidationError);
    EXPECT_THROW((spc::LambdaProfile{{0, 100, 50}, {1, 2}, {}}).validate(), ValidationError);
    EXPECT_THROW((spc::LambdaProfile{{0, 100}, {-1}, {}}).validate(), ValidationError);
}

TEST(ForwardRate, DeltaReducesToTwoPhononFactor) {
    const spc::LambdaProfile p{{0.0, 600.0}, {1.0}, {}};
    const double r = spc::forward_rate(p, delta_set(), 100.0);
    EXPECT_NEAR(r, 0.4077, 1e-3);
    EXPECT_NEAR(r, thermal::two_phonon_factor(100.0, 100.0), 1e-12);
}

TEST(ForwardRate, ZeroAndLinearity) {
    auto p = table_profile();
    const auto& set = two_band();
    p.lambdas_per_us = {0.0, 0.0};
    EXPECT_EQ(spc::forward_rate(p, set, 50.0), 0.0);
    auto a = table_profile();
    auto b = a;
    for (double& l : b.lambdas_per_us) l *= 2.0;
    for (double T : {10.0, 42.0, 300.0})
        EXPECT_NEAR(spc::forward_rate(b, set, T), 2.0 * spc::forward_rate(a, set, T),
                    1e-13 * spc::forward_rate(b, set, T));
}

TEST(ForwardRate, OutOfRangeRefused) {
    EXPECT_THROW(spc::forward_rate(table_profile(), two_band(), 400.0), ValidationError);
    EXPECT_NO_THROW(spc::forward_rate(table_profile(), two_band(), 400.0, spc::SpectrumMode::nearest));
}

TEST(ForwardRate, PartialBinsAtEdges) {
    // Uniform density 1 on [0, 10] with edges at 2.5: window contributions add up.
    const auto g = EnergyGrid::uniform(0, 10, 4);
    SpectrumSet set({Spectrum{g, {1, 1, 1, 1}, 10.0}});
    const spc::LambdaProfile split{{0, 3.0, 10.0}, {1.0, 1.0}, {}};
    const spc::LambdaProfile whole{{0, 10.0}, {1.0}, {}};
    EXPECT_NEAR(spc::forward_rate(split, set, 10.0, spc::SpectrumMode::nearest),
                spc::forward_rate(whole, set, 10.0, spc::SpectrumMode::nearest), 1e-14);
}

TEST(FitLambda, NoiselessRoundTrip) {
    const auto T = synth::log_spaced_temperatures(10, 300, 20);
    const auto series = synth::generate_rate_series(table_profile(), two_band(), T, 0.0, 0);
    const auto fit = spc::fit_lambda_windows(series, two_band(), {0, 185, 600});
    EXPECT_NEAR(fit.profile.lambdas_per_us[0] / 0.068, 1.0, 1e-3);
    EXPECT_NEAR(fit.profile.lambdas_per_us[1] / 127.0, 1.0, 1e-3);
    EXPECT_LT(fit.rmse_log, 1e-8);
    ASSERT_EQ(fit.crossovers.size(), 1u);
    EXPECT_EQ(fit.representation, "instrument");
}

TEST(FitLambda, ThreeWindowRoundTrip) {
    const spc::LambdaProfile truth{{0, 50, 185, 600}, {0.05, 0.5, 127.0}, {}};
    const auto T = synth::log_spaced_temperatures(10, 300, 24);
    const auto series = synth::generate_rate_series(truth, two_band(), T, 0.0, 0);
    const auto fit = spc::fit_lambda_windows(series, two_band(), truth.edges_cm);
    for (std::size_t w = 0; w < 3; ++w)
        EXPECT_NEAR(fit.profile.lambdas_per_us[w] / truth.lambdas_per_us[w], 1.0, 1e-3) << w;
}

TEST(FitLambda, SingleWindowFromOnePoint) {
    const auto g = EnergyGrid::uniform(0, 600, 600);
    SpectrumSet flat({Spectrum{g, std::vector<double>(600, 1.0 / 600.0), 10.0},
                      Spectrum{g, std::vector<double>(600, 1.0 / 600.0), 300.0}});
    const spc::LambdaProfile p{{0, 600}, {2.5}, {}};
    relax::RateSeries s;
    s.points.push_back({77.0, spc::forward_rate(p, flat, 77.0)});
    const auto fit = spc::fit_lambda_windows(s, flat, {0, 600});
    EXPECT_NEAR(fit.profile.lambdas_per_us[0], 2.5, 1e-9);
}

TEST(FitLambda, EmptyWindowNamed) {
    const auto T = synth::log_spaced_temperatures(10, 300, 10);
    const spc::LambdaProfile p{{0, 600}, {1.0}, {}};
    const auto set = delta_set(100.0, {5.0, 400.0});
    const auto s = synth::generate_rate_series(p, set, T, 0.0, 0);
    try {
        (void)spc::fit_lambda_windows(s, set, {0, 185, 600});
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("window 2"), std::string::npos) << e.what();
    }
}

TEST(FitLambda, FloorDropsLowTemperatures) {
    const auto T = synth::log_spaced_temperatures(5, 300, 20);
    const auto series = synth::generate_rate_series(table_profile(), two_band(), T, 0.0, 0);
    const auto fit = spc::fit_lambda_windows(series, two_band(), {0, 185, 600});
    EXPECT_GE(fit.t_min_K, 10.0);
    EXPECT_LT(fit.n_points, series.points.size());
}

TEST(FitLambda, DirectTermOptional) {
    const auto T = synth::log_spaced_temperatures(10, 300, 20);
    const auto series = synth::generate_rate_series(table_profile(), two_band(), T, 0.0, 0, 1e-4);
    spc::FitOptions o;
    o.include_direct = true;
    const auto fit = spc::fit_lambda_windows(series, two_band(), {0, 185, 600}, o);
    EXPECT_NEAR(fit.a_dir_per_us_per_K / 1e-4, 1.0, 1e-2);
    EXPECT_NEAR(fit.profile.lambdas_per_us[1] / 127.0, 1.0, 1e-3);
}

TEST(CutoffScan, FindsTrueCutoff) {
    const auto T = synth::log_spaced_temperatures(10, 300, 20);
    const auto series = synth::generate_rate_series(table_profile(), two_band(), T, 0.0, 0);
    const auto scan = spc::cutoff_scan({series}, two_band(), {});
    EXPECT_NEAR(scan.selected_cutoff_cm, 185.0, 2.0 + 1e-9);
    EXPECT_TRUE(scan.unique_coarse_minimum);
    EXPECT_FALSE(scan.weakly_identified);
    EXPECT_EQ(scan.coarse_size, spc::default_cutoff_grid().size());
}

TEST(CutoffScan, SinglePointGrid) {
    const auto T = synth::log_spaced_temperatures(10, 300, 12);
    const auto series = synth::generate_rate_series(table_profile(), two_band(), T, 0.0, 0);
    const auto scan = spc::cutoff_scan({series}, two_band(), {250.0});
    EXPECT_EQ(scan.selected_cutoff_cm, 250.0);
    EXPECT_THROW(spc::cutoff_scan({series}, two_band(), {600.0}), ValidationError);
}

TEST(CutoffScan, HighTemperatureOnlyIsWeak) {
    const auto T = synth::log_spaced_temperatures(200, 300, 8);
    const auto series = synth::generate_rate_series(table_profile(), two_band(), T, 0.05, 11);
    spc::CutoffScanOptions o;
    o.refine_factor = 1;
    const auto scan = spc::cutoff_scan({series}, two_band(), {}, o);
    EXPECT_TRUE(scan.weakly_identified);
}

TEST(SpectralDensity, IntegratesToForwardRate) {
    const auto p = table_profile();
    for (double T : {10.0, 42.0, 150.0, 300.0}) {
        const auto d = spc::spectral_density(p, two_band(), T);
        const double want = spc::forward_rate(p, two_band(), T);
        EXPECT_NEAR(integrate(d, two_band().grid()), want, 1e-10 * want);
    }
}

TEST(SpectralDensity, LowTemperatureSuppressesHighWindow) {
    const auto p = table_profile();
    const auto set = synth::generate_spectrum_set([] {
        auto s = synth::two_band_spec();
        s.temperatures_K.insert(s.temperatures_K.begin(), 4.0);
        return s;
    }());
    const auto d = spc::spectral_density(p, set, 5.0);
    const double total = integrate(d, set.grid());
    const double high = integrate_range(d, set.grid(), 185.0, 700.0);
    EXPECT_LT(high / total, 1e-6);
    auto zero_low = p;
    zero_low.lambdas_per_us[0] = 0.0;
    const auto d2 = spc::spectral_density(zero_low, set, 50.0);
    for (std::size_t i = 0; i < 185; ++i) EXPECT_EQ(d2[i], 0.0);
}

TEST(Crossover, ConstructedAt42K) {
    const auto& set = two_band();
    spc::LambdaProfile p{{0, 185, 600}, {1.0, 0.0}, {}};
    const auto b = spc::window_basis(p, set, 42.0);
    p.lambdas_per_us[1] = b[0] / b[1];
    const auto c = spc::crossover_temperatures(p, set, set.t_min(), set.t_max());
    ASSERT_EQ(c.size(), 1u);
    EXPECT_EQ(c[0].status, spc::CrossoverStatus::found);
    EXPECT_NEAR(c[0].temperature_K, 42.0, 0.1);
}

TEST(Crossover, NoneAndDegenerate) {
    const auto& set = two_band();
    spc::LambdaProfile p{{0, 185, 600}, {1.0, 0.0}, {}};
    EXPECT_EQ(spc::crossover_temperatures(p, set, 5, 300)[0].status, spc::CrossoverStatus::none);
    // One bin split evenly by the window edge: both windows see the same
    // energy and mass, so they contribute equally at every T.
    Spectrum s{EnergyGrid({0.0, 99.0, 100.0, 200.0}), {0.0, 1.0, 0.0}, 10.0};
    SpectrumSet halves({s});
    spc::LambdaProfile same{{0, 99.5, 200}, {1.0, 1.0}, {}};
    const auto d = spc::crossover_temperatures(same, halves, 5, 300, spc::SpectrumMode::nearest);
    EXPECT_EQ(d[0].status, spc::CrossoverStatus::degenerate);
}

TEST(AcousticExclusion, NeverLowersLowWindow) {
    const auto T = synth::log_spaced_temperatures(10, 300, 20);
    const auto series = synth::generate_rate_series(table_profile(), two_band(), T, 0.05, 5);
    const auto base = spc::fit_lambda_windows(series, two_band(), {0, 185, 600});
    spc::FitOptions o;
    o.excluded_below_cm = 15.0;
    const auto excl = spc::fit_lambda_windows(series, two_band(), {0, 185, 600}, o);
    EXPECT_GE(excl.profile.lambdas_per_us[0], base.profile.lambdas_per_us[0]);
}

TEST(Sweep, OneCellMatchesDirectFit) {
    const auto T = synth::log_spaced_temperatures(10, 300, 20);
    const auto series = synth::generate_rate_series(table_profile(), two_band(), T, 0.0, 0);
    const auto cells = spc::robustness_sweep(series, {{"instrument", two_band()}}, {600.0}, {0, 185, 600});
    ASSERT_EQ(cells.size(), 1u);
    ASSERT_TRUE(cells[0].fit);
    const auto direct = spc::fit_lambda_windows(series, two_band(), {0, 185, 600});
    EXPECT_EQ(cells[0].fit->profile.lambdas_per_us, direct.profile.lambdas_per_us);
}

TEST(Sweep, LowerNormalizationLowersLambdaKeepsRatio) {
    const auto T = synth::log_spaced_temperatures(10, 300, 20);
    const auto series = synth::generate_rate_series(table_profile(), two_band(), T, 0.0, 0);
    const auto cells = spc::robustness_sweep(series, {{"instrument", two_band()}}, {600.0, 380.0}, {0, 185, 600});
    ASSERT_TRUE(cells[0].fit && cells[1].fit);
    const auto& a = cells[0].fit->profile.lambdas_per_us;
    const auto& b = cells[1].fit->profile.lambdas_per_us;
    EXPECT_LT(b[0], a[0]);
    EXPECT_LT(b[1], a[1]);
    EXPECT_NEAR(cells[1].lambda_ratios[0] / cells[0].lambda_ratios[0], 1.0, 1e-2);
}

TEST(Sweep, FailingCellRecorded) {
    const auto T = synth::log_spaced_temperatures(10, 300, 20);
    const auto series = synth::generate_rate_series(table_profile(), two_band(), T, 0.0, 0);
    const auto cells = spc::robustness_sweep(series, {{"instrument", two_band()}}, {600.0, 5000.0}, {0, 185, 600});
    ASSERT_EQ(cells.size(), 2u);
    EXPECT_TRUE(cells[0].fit.has_value());
    EXPECT_FALSE(cells[1].fit.has_value());
    EXPECT_FALSE(cells[1].error.empty());
}
