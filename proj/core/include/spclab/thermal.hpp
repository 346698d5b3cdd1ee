#pragma once

/// @file
///
/// Bose-Einstein statistics and the equal-energy two-phonon factor
/// n(n+1) = e^x / (e^x - 1)^2, x = E / (k_B T), that every relaxation model
/// in the library is built on.

#include <vector>

#include "spclab/core.hpp"

namespace spclab::thermal {

/// Below this x the closed forms lose precision and series are used.
inline constexpr double small_x = 1e-6;
/// Above this x the mode is treated as frozen out.
inline constexpr double large_x = 700.0;

/// x = E / (k_B T). Throws DomainError unless E > 0 and T > 0.
double reduced_energy(double energy_cm, double temperature_K);

/// n(E, T) = 1 / (e^x - 1).
double bose_occupation(double energy_cm, double temperature_K);

/// n(E, T) (n(E, T) + 1), the probability weight of a two-phonon Raman
/// event with both phonons at energy E.
double two_phonon_factor(double energy_cm, double temperature_K);

/// Same factor as a function of x, for callers that already hold x.
double two_phonon_factor_x(double x);

struct BoseWeightedSpectrum {
    EnergyGrid grid;
    std::vector<double> intensity; // G_T(E) n(E, T), per cm^-1
    double temperature_K = 0.0;
};

/// Per-bin G_T(E_i) n(E_i, T). Bins centred at E <= 0 get weight 0.
BoseWeightedSpectrum bose_weight(const Spectrum& spec);

} // namespace spclab::thermal
