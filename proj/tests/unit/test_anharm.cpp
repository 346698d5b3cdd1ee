#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "spclab/anharm.hpp"
#include "spclab/synth.hpp"

using namespace spclab;

namespace {

SpectrumSet single_peak_set(double c0, double soft, double f0, double broad, double eta = 0.0) {
    synth::SynthSpec s;
    s.grid = EnergyGrid::uniform(0.0, 700.0, 1400);
    s.temperatures_K = {5, 50, 100, 150, 200, 250, 300};
    s.peaks = {{c0, f0, 1.0, soft, broad}};
    s.debye_amplitude = 0.0;
    if (eta == 0.0) return synth::generate_spectrum_set(s);
    // Mix in a Lorentzian by hand for the model-nesting check.
    auto set = synth::generate_spectrum_set(s);
    std::vector<Spectrum> out;
    for (auto sp : set.spectra()) {
        for (std::size_t i = 0; i < sp.intensity.size(); ++i) {
            const double z = (sp.grid.centers()[i] - c0) / f0;
            sp.intensity[i] = (1 - eta) * sp.intensity[i] + eta * 0.02 / (1 + 4 * z * z);
        }
        out.push_back(sp);
    }
    return SpectrumSet(out);
}

} // namespace

TEST(PhononPeaks, SofteningTracked) {
    const auto set = single_peak_set(256.0, -5.0 / 295.0, 8.0, 0.0);
    const auto tracks = anharm::fit_phonon_peaks(set, {{256.0, 30.0, "stretch"}});
    ASSERT_EQ(tracks.size(), 1u);
    const auto& last = tracks[0].points.back();
    EXPECT_NEAR(last.d_center_cm, -5.0, 0.2);
    EXPECT_EQ(*tracks[0].base_temperature_K, 5.0);
    EXPECT_EQ(tracks[0].points.front().d_center_cm, 0.0);
}

TEST(PhononPeaks, BroadeningOnly) {
    const auto set = single_peak_set(256.0, 0.0, 8.0, 4.0 / 295.0);
    const auto tracks = anharm::fit_phonon_peaks(set, {{256.0, 40.0, ""}});
    const auto& last = tracks[0].points.back();
    EXPECT_NEAR(last.d_center_cm, 0.0, 0.05);
    EXPECT_NEAR(last.d_fwhm_cm / 4.0, 1.0, 0.05);
}

TEST(PhononPeaks, PseudoVoigtOnGaussianGivesSmallEta) {
    const auto set = single_peak_set(256.0, 0.0, 8.0, 0.0);
    anharm::PeakFitOptions o;
    o.profile = peakfit::Profile::pseudo_voigt;
    const auto tracks = anharm::fit_phonon_peaks(set, {{256.0, 30.0, ""}}, o);
    for (const auto& p : tracks[0].points) EXPECT_LT(p.eta, 0.05);
}

TEST(PhononPeaks, OverlapWarning) {
    const auto set = single_peak_set(256.0, 0.0, 8.0, 0.0);
    ScopedWarningCapture cap;
    (void)anharm::fit_phonon_peaks(set, {{250.0, 20.0, ""}, {262.0, 20.0, ""}});
    EXPECT_TRUE(cap.contains("unresolved overlap"));
}

TEST(PhononPeaks, ResolutionSubtractedInQuadrature) {
    const auto set = single_peak_set(256.0, 0.0, 10.0, 0.0);
    anharm::PeakFitOptions o;
    o.resolution_fwhm_cm = 6.0;
    const auto tracks = anharm::fit_phonon_peaks(set, {{256.0, 40.0, ""}}, o);
    EXPECT_NEAR(tracks[0].points[0].fwhm_cm, 8.0, 0.05);
}

TEST(Gruneisen, SingleExactPoint) {
    const std::vector<double> dv{0.01}, de{-0.04};
    const auto r = anharm::gruneisen(dv, de);
    EXPECT_NEAR(r.gamma, 4.0, 1e-12);
}

TEST(Gruneisen, ZeroShiftGivesZero) {
    const std::vector<double> dv{0.0, 0.005, 0.01}, de{0.0, 0.0, 0.0};
    EXPECT_EQ(anharm::gruneisen(dv, de).gamma, 0.0);
}

TEST(Gruneisen, NoisyRegression) {
    std::mt19937_64 rng(42);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<double> dv, de;
    for (int i = 0; i <= 20; ++i) {
        const double v = 0.001 * i;
        dv.push_back(v);
        de.push_back(-2.0 * v * (1.0 + 0.01 * z(rng)));
    }
    const auto r = anharm::gruneisen(dv, de);
    EXPECT_NEAR(r.gamma, 2.0, 0.1);
    EXPECT_GT(r.gamma_err, 0.0);
}

TEST(Gruneisen, LinearityResidualZeroWhenProportional) {
    const std::vector<double> dv{0.0, 0.002, 0.004, 0.009}, de{0.0, -0.006, -0.012, -0.027};
    const auto r = anharm::gruneisen(dv, de);
    EXPECT_NEAR(r.linearity_residual, 0.0, 1e-15);
    EXPECT_NEAR(r.origin_residual, 0.0, 1e-15);
    const std::vector<double> curved{0.0, -0.001, -0.010, -0.050};
    EXPECT_GT(anharm::gruneisen(dv, curved).linearity_residual, 1e-4);
}

TEST(Gruneisen, NoExpansionSignal) {
    const std::vector<double> dv{0.0, 0.0, 0.0}, de{0.0, -0.01, -0.02};
    try {
        (void)anharm::gruneisen(dv, de);
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("no expansion signal"), std::string::npos);
    }
}

TEST(Gruneisen, TrackAndVolumeRebasedToBase) {
    anharm::PhononPeakTrack t;
    lattice::VolumeTrack v;
    const double gamma = 3.0;
    for (double T : {5.0, 100.0, 200.0, 300.0}) {
        const double vol = 1e-4 * T;  // relative to some other reference
        lattice::VolumePoint vp;
        vp.temperature_K = T;
        vp.dv_over_v = vol;
        v.points.push_back(vp);
        const double rebased = (1 + vol) / (1 + 5e-4) - 1;
        anharm::PhononPoint p;
        p.temperature_K = T;
        p.center_cm = 256.0 * (1.0 - gamma * rebased);
        t.points.push_back(p);
    }
    const auto r = anharm::gruneisen(t, v);
    EXPECT_NEAR(r.gamma, gamma, 1e-10);
    EXPECT_EQ(r.base_temperature_K, 5.0);
    EXPECT_EQ(r.mode_energy_cm, 256.0);
}

TEST(Gruneisen, IntensityScaleInvariant) {
    auto set = single_peak_set(256.0, -5.0 / 295.0, 8.0, 0.0);
    std::vector<Spectrum> scaled;
    for (auto s : set.spectra()) {
        for (double& x : s.intensity) x *= 37.0;
        scaled.push_back(s);
    }
    const auto a = anharm::fit_phonon_peaks(set, {{256.0, 30.0, ""}});
    const auto b = anharm::fit_phonon_peaks(SpectrumSet(scaled), {{256.0, 30.0, ""}});
    lattice::VolumeTrack v;
    for (const auto& p : a[0].points) {
        lattice::VolumePoint vp;
        vp.temperature_K = p.temperature_K;
        vp.dv_over_v = 5e-5 * p.temperature_K;
        v.points.push_back(vp);
    }
    EXPECT_NEAR(anharm::gruneisen(a[0], v).gamma, anharm::gruneisen(b[0], v).gamma, 1e-6);
}
