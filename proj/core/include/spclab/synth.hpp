#pragma once

/// @file
///
/// Forward simulators with known ground truth: spectrum sets, relaxation
/// rate series and recovery traces. Every generator is a pure function of
/// its parameters and seed.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spclab/core.hpp"
#include "spclab/lattice.hpp"
#include "spclab/modes.hpp"
#include "spclab/relax.hpp"
#include "spclab/spc.hpp"

namespace spclab::synth {

/// Engine and distribution behind every seeded generator.
inline constexpr std::string_view rng_algorithm = "mt19937_64 + std::normal_distribution";

struct SynthPeak {
    double center_cm = 0.0;
    double fwhm_cm = 0.0;
    /// Integrated area before normalization.
    double weight = 0.0;
    /// d center / dT, relative to the lowest temperature.
    double softening_cm_per_K = 0.0;
    /// d fwhm / dT, relative to the lowest temperature.
    double broadening_cm_per_K = 0.0;
};

struct SynthSpec {
    std::vector<SynthPeak> peaks;
    /// A of the A E^2 tail added below debye_cutoff_cm.
    double debye_amplitude = 0.0;
    double debye_cutoff_cm = 15.0;
    std::vector<double> temperatures_K;
    EnergyGrid grid;
    double normalization_cutoff_cm = 600.0;
    /// Additive Gaussian noise, relative to the largest intensity.
    double noise_rel = 0.0;
    std::uint64_t seed = 0;
    std::string representation = "instrument";

    void validate() const;
};

/// Gaussian peaks integrated over each bin, plus the Debye tail, normalized
/// to unity up to normalization_cutoff_cm.
SpectrumSet generate_spectrum_set(const SynthSpec& spec);

/// Broad low- and high-energy bands with continuous weight across
/// 0-600 cm^-1 and mild softening; 1 cm^-1 bins up to 700 cm^-1.
SynthSpec two_band_spec(std::uint64_t seed = 0);

/// Discrete peak comb with a softening 256 cm^-1 line (-5 cm^-1 from 5 to
/// 300 K) on a 0.5 cm^-1 grid.
SynthSpec comb_spec(std::uint64_t seed = 0);

std::vector<double> log_spaced_temperatures(double lo_K, double hi_K, std::size_t n);

/// forward_rate (+ A_dir T) with multiplicative noise exp(noise_rel z).
relax::RateSeries generate_rate_series(const spc::LambdaProfile& profile, const SpectrumSet& set,
                                       const std::vector<double>& temperatures_K, double noise_rel,
                                       std::uint64_t seed, std::optional<double> a_dir_per_us_per_K = std::nullopt,
                                       spc::SpectrumMode mode = spc::SpectrumMode::interpolate);

struct LocalModeTruth {
    double amplitude_per_us = 0.0;
    double energy_cm = 0.0;
};

/// A_dir T + sum_k C_k R(E_k, T) with multiplicative lognormal noise.
relax::RateSeries generate_local_mode_series(double a_dir_per_us_per_K, const std::vector<LocalModeTruth>& modes,
                                             const std::vector<double>& temperatures_K, double noise_rel,
                                             std::uint64_t seed);

/// A_dir T + C T^9 I_8(theta / T) with multiplicative lognormal noise.
relax::RateSeries generate_debye_series(double a_dir_per_us_per_K, double c_raman, double theta_D_K,
                                        const std::vector<double>& temperatures_K, double noise_rel,
                                        std::uint64_t seed);

/// Inversion: 1 - 2 exp(-(t/T1)^beta); saturation: 1 - exp(-(t/T1)^beta);
/// additive Gaussian noise; n log-spaced delays over [T1 / 50, 10 T1].
relax::RecoveryTrace generate_recovery_trace(double t1_us, double beta, relax::TraceKind kind, double noise,
                                             std::uint64_t seed, std::size_t n = 64);

struct SynthReflection {
    /// d-spacing at the reference temperature.
    double d0_A = 0.0;
    double fwhm_A = 0.0;
    double amplitude = 0.0;
    /// Linear expansion coefficient: d(T) = d0 (1 + alpha (T - T_ref)).
    double alpha_per_K = 0.0;
};

/// Gaussian reflections on a linear background over an increasing d grid,
/// with additive Gaussian noise relative to the largest reflection.
lattice::DiffractionPattern generate_diffraction_pattern(const std::vector<SynthReflection>& reflections,
                                                         double temperature_K, double reference_temperature_K,
                                                         const std::vector<double>& d_grid_A, double noise_rel,
                                                         std::uint64_t seed);

/// Square-planar metal(N)4 core in the xy plane with one ring carbon per
/// ligand. Modes: pure breathing at 350 cm^-1, breathing with tangential
/// admixture at 268 and 288 cm^-1, and antisymmetric, out-of-plane and
/// ring modes that score low on stretch character.
modes::ModeSet planar_core_mode_set();

} // namespace spclab::synth
