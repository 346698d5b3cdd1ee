#include <gtest/gtest.h>

#include <cmath>

#include "spclab/thermal.hpp"

using namespace spclab;

namespace {

// Direct closed forms in extended precision, valid away from the x -> 0
// and x -> infinity extremes.
long double oracle_n(long double E, long double T) {
    const long double x = E / (0.6950348004861274L * T);
    return 1.0L / std::expm1(x);
}

long double oracle_R(long double E, long double T) {
    const long double x = E / (0.6950348004861274L * T);
    const long double d = std::expm1(x);
    return std::exp(x) / (d * d);
}

} // namespace

TEST(Thermal, BoltzmannConstant) { EXPECT_NEAR(constants::kB_cm_per_K, 0.6950348, 1e-7); }

TEST(Thermal, ReducedEnergyDomain) {
    EXPECT_THROW(thermal::reduced_energy(0.0, 10.0), DomainError);
    EXPECT_THROW(thermal::reduced_energy(10.0, 0.0), DomainError);
    EXPECT_THROW(thermal::bose_occupation(-1.0, 10.0), DomainError);
    EXPECT_THROW(thermal::two_phonon_factor(10.0, -3.0), DomainError);
}

TEST(Thermal, TwoPhononFactorAtLocalModeEnergy) {
    // 42.5 cm^-1 at 20 K: x = 3.0574, R = 0.051762.
    EXPECT_NEAR(thermal::reduced_energy(42.5, 20.0), 3.05740, 1e-4);
    EXPECT_NEAR(thermal::two_phonon_factor(42.5, 20.0), 0.05176, 1e-4);
    EXPECT_NEAR(thermal::two_phonon_factor(42.5, 20.0), static_cast<double>(oracle_R(42.5L, 20.0L)), 1e-15);
}

TEST(Thermal, HighTemperatureLimit) {
    const double x = thermal::reduced_energy(200.0, 3000.0);
    EXPECT_NEAR(thermal::two_phonon_factor(200.0, 3000.0) * x * x, 1.0, 1e-3);
}

TEST(Thermal, BoseMatchesClosedForm) {
    for (double E : {1.0, 10.0, 100.0, 1000.0})
        for (double T : {1.0, 10.0, 300.0, 1000.0}) {
            const double want = static_cast<double>(oracle_n(E, T));
            EXPECT_NEAR(thermal::bose_occupation(E, T), want, 1e-12 * std::max(1.0, want));
            const double r = static_cast<double>(oracle_R(E, T));
            EXPECT_NEAR(thermal::two_phonon_factor(E, T), r, 1e-12 * std::max(1.0, r));
        }
    EXPECT_NEAR(thermal::bose_occupation(1.0, 1000.0), 694.5349, 1e-3);
    EXPECT_NEAR(thermal::two_phonon_factor(100.0, 100.0), 0.407705, 1e-6);
}

TEST(Thermal, SmallAndLargeXBranchesAreContinuous) {
    // Just either side of the series switch.
    for (double x : {thermal::small_x * 0.999, thermal::small_x * 1.001}) {
        const double want = 1.0 / (x * x) - 1.0 / 12.0;
        EXPECT_NEAR(thermal::two_phonon_factor_x(x) / want, 1.0, 1e-9);
    }
    EXPECT_NEAR(thermal::two_phonon_factor_x(699.9) / std::exp(-699.9), 1.0, 1e-12);
    EXPECT_NEAR(thermal::two_phonon_factor_x(700.1) / std::exp(-700.1), 1.0, 1e-12);
    EXPECT_EQ(thermal::two_phonon_factor_x(5000.0), 0.0);
}

TEST(Thermal, FactorIsNTimesNPlusOne) {
    for (double E : {5.0, 42.5, 264.8})
        for (double T : {3.0, 45.0, 290.0}) {
            const double n = thermal::bose_occupation(E, T);
            EXPECT_NEAR(thermal::two_phonon_factor(E, T), n * (n + 1.0), 1e-12 * (1.0 + n * n));
        }
}

TEST(Thermal, BoseWeightMultipliesByOccupation) {
    Spectrum s{EnergyGrid({0.0, 0.0000001, 10.0, 20.0}), {5.0, 1.0, 1.0}, 50.0};
    const auto w = thermal::bose_weight(s);
    ASSERT_EQ(w.intensity.size(), 3u);
    EXPECT_GT(w.intensity[0], 0.0);
    EXPECT_NEAR(w.intensity[2], thermal::bose_occupation(15.0, 50.0), 1e-12);
}
