#include <gtest/gtest.h>

#include <cmath>

#include "spclab/error.hpp"
#include "spclab/lattice.hpp"
#include "spclab/peakfit.hpp"

using namespace spclab;

namespace {

lattice::DiffractionPattern gaussian_pattern(double center, double fwhm, double T, double amp = 100.0) {
    lattice::DiffractionPattern p;
    p.temperature_K = T;
    const double s = fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0)));
    for (int i = 0; i <= 400; ++i) {
        const double d = 3.2 + 0.0007 * i;
        p.d_A.push_back(d);
        p.intensity.push_back(5.0 + 2.0 * (d - 3.3) + amp * std::exp(-0.5 * std::pow((d - center) / s, 2)));
    }
    return p;
}

} // namespace

TEST(PeakFit, GaussianProfileShape) {
    EXPECT_DOUBLE_EQ(peakfit::shape(peakfit::Profile::gaussian, 1.0, 1.0, 2.0), 1.0);
    EXPECT_NEAR(peakfit::shape(peakfit::Profile::gaussian, 2.0, 1.0, 2.0), 0.5, 1e-15);
    EXPECT_NEAR(peakfit::shape(peakfit::Profile::pseudo_voigt, 2.0, 1.0, 2.0, 1.0), 0.5, 1e-15);
    EXPECT_THROW(peakfit::profile_from_string("lorentz"), ValidationError);
}

TEST(PeakFit, TooFewPointsInWindow) {
    const auto p = gaussian_pattern(3.34, 0.02, 10);
    EXPECT_THROW(peakfit::fit_peak(p.d_A, p.intensity, 3.34, 3.342, peakfit::Profile::gaussian, 3.341),
                 ValidationError);
}

TEST(TrackPeaks, RecoversCenter) {
    const auto tracks = lattice::track_peaks({gaussian_pattern(3.34, 0.02, 10)}, {{3.335, 0.06, "a"}});
    ASSERT_EQ(tracks.size(), 1u);
    const auto& pt = tracks[0].points[0];
    ASSERT_FALSE(pt.missing);
    EXPECT_NEAR(pt.center_A, 3.34, 1e-4);
    EXPECT_NEAR(pt.fwhm_A, 0.02, 1e-4);
}

TEST(TrackPeaks, LinearThermalDrift) {
    std::vector<lattice::DiffractionPattern> pats;
    std::vector<double> T;
    for (int k = 0; k <= 10; ++k) {
        T.push_back(5.0 + 29.5 * k);
        pats.push_back(gaussian_pattern(3.34 + 1e-5 * T.back(), 0.02, T.back()));
    }
    const auto tracks = lattice::track_peaks(pats, {{3.34, 0.05, ""}});
    double st = 0, sc = 0, stt = 0, stc = 0;
    const double n = static_cast<double>(T.size());
    for (std::size_t i = 0; i < T.size(); ++i) {
        ASSERT_FALSE(tracks[0].points[i].missing);
        const double c = tracks[0].points[i].center_A;
        st += T[i];
        sc += c;
        stt += T[i] * T[i];
        stc += T[i] * c;
    }
    const double slope = (n * stc - st * sc) / (n * stt - st * st);
    EXPECT_NEAR(slope / 1e-5, 1.0, 0.02);
}

TEST(TrackPeaks, FlatPatternAllMissingWithWarning) {
    auto p = gaussian_pattern(3.34, 0.02, 10, 0.0);
    ScopedWarningCapture cap;
    const auto tracks = lattice::track_peaks({p}, {{3.34, 0.05, "flat"}});
    EXPECT_TRUE(tracks[0].points[0].missing);
    EXPECT_TRUE(cap.contains("no detected points"));
}

TEST(TrackPeaks, DecreasingGridAccepted) {
    auto p = gaussian_pattern(3.34, 0.02, 10);
    std::reverse(p.d_A.begin(), p.d_A.end());
    std::reverse(p.intensity.begin(), p.intensity.end());
    const auto tracks = lattice::track_peaks({p}, {{3.335, 0.06, ""}});
    EXPECT_NEAR(tracks[0].points[0].center_A, 3.34, 1e-4);
}

namespace {

lattice::PeakTrack track_with(std::vector<std::pair<double, double>> pts) {
    lattice::PeakTrack t;
    for (auto [T, d] : pts) {
        lattice::PeakPoint p;
        p.temperature_K = T;
        p.center_A = d;
        t.points.push_back(p);
    }
    return t;
}

} // namespace

TEST(Volume, CubeOfRatio) {
    EXPECT_EQ(lattice::isotropic_volume_change(0.0), 0.0);
    EXPECT_NEAR(lattice::isotropic_volume_change(0.005), 0.015075125, 1e-12);
    const auto v = lattice::volume_expansion({track_with({{300, 3.0 * 1.005}})}, {3.0});
    EXPECT_NEAR(*v.points[0].dv_over_v, 0.015075, 1e-6);
}

TEST(Volume, TwoTracksMeanAndSpread) {
    const auto v = lattice::volume_expansion({track_with({{300, 2.0 * 1.004}}), track_with({{300, 3.0 * 1.006}})},
                                             {2.0, 3.0});
    const double a = std::pow(1.004, 3) - 1.0, b = std::pow(1.006, 3) - 1.0;
    EXPECT_NEAR(*v.points[0].dv_over_v, 0.5 * (a + b), 1e-12);
    EXPECT_NEAR(*v.points[0].dv_over_v, 0.01510, 5e-5);
    EXPECT_NEAR(v.points[0].spread, std::abs(a - b) / std::sqrt(2.0), 1e-12);
    EXPECT_GT(v.points[0].spread, 0.0);
}

TEST(Volume, ReferenceFromHighestTemperatureFit) {
    const auto v = lattice::volume_expansion({track_with({{5, 2.99}, {150, 2.995}, {300, 3.0}})});
    ASSERT_EQ(v.points.size(), 3u);
    EXPECT_EQ(*v.points[2].dv_over_v, 0.0);
    EXPECT_TRUE(v.reference_from_fit[0]);
    ASSERT_TRUE(v.reference_temperature_K);
    EXPECT_EQ(*v.reference_temperature_K, 300.0);
    EXPECT_LT(*v.points[0].dv_over_v, *v.points[1].dv_over_v);
}

TEST(Volume, MissingPointLeavesGap) {
    auto t = track_with({{5, 2.99}, {300, 3.0}});
    t.points[0].missing = true;
    const auto v = lattice::volume_expansion({t}, {3.0});
    EXPECT_FALSE(v.points[0].dv_over_v);
    EXPECT_EQ(v.points[0].n_tracks, 0u);
}

TEST(Volume, FirstOrderIdentity) {
    for (double dd : {1e-5, 1e-4, 1e-3}) {
        const double dv = lattice::isotropic_volume_change(dd);
        EXPECT_LE(std::abs(dv - 3.0 * dd), 3.01 * dd * dd);
    }
}
