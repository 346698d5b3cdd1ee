#pragma once

/// @file
///
/// Analytics on harmonic Gamma-point modes: thermal per-atom RMS
/// displacements, an in-plane symmetric-stretch score for a metal-ligand
/// core, and an incoherent neutron-weighted density of states.

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "spclab/core.hpp"

namespace spclab::modes {

using Vec3 = std::array<double, 3>;

struct Atom {
    std::string element;
    double mass_amu = 0.0;
    Vec3 position_A{};
    double sigma_inc_barn = 0.0;
};

struct Mode {
    double freq_cm = 0.0;
    /// Mass-weighted, unit 2-norm, 3 components per atom.
    std::vector<double> eigvec;
};

struct ModeSet {
    std::vector<Atom> atoms;
    std::vector<Mode> modes;

    /// Masses > 0, frequencies >= 0 and ascending, eigenvector length 3N
    /// with norm 1 +/- 1e-6.
    void validate() const;
    std::size_t atom_count() const { return atoms.size(); }
    /// Real-space displacement pattern of mode k on atom a: e_a / sqrt(m_a).
    Vec3 displacement(std::size_t k, std::size_t a) const;
};

/// sqrt( sum_k hbar / (2 m_a w_k) |e_ka|^2 (2 n_k + 1) ) in Angstrom over
/// modes with 0 < freq <= e_max. Zero-frequency modes in range are skipped
/// with a warning. T = 0 gives the zero-point value.
std::vector<double> rmsd_per_atom(const ModeSet& ms, double temperature_K, double e_max_cm);

/// Arithmetic mean over the listed atom indices. Throws on an empty group.
double mean_over(const std::vector<double>& values, const std::vector<std::size_t>& atoms);

struct CoreSpec {
    std::size_t center = 0;
    std::array<std::size_t, 4> ligands{};
    /// Molecular-plane normal.
    Vec3 normal{0.0, 0.0, 1.0};

    void validate(const ModeSet& ms) const;
    std::vector<std::size_t> atoms() const;
};

struct StretchScore {
    std::size_t mode_index = 0;
    double freq_cm = 0.0;
    double score = 0.0;
};

/// Per mode: r_b = u_ligand - u_center, p_b = in-plane bond-axis component of
/// r_b, score = |sum_b p_b| / (4 max_b |r_b|). Descending score, ties by
/// mode index.
std::vector<StretchScore> stretch_character(const ModeSet& ms, const CoreSpec& core);

struct DosOptions {
    double broadening_fwhm_cm = 5.0;
    double normalization_cutoff_cm = 600.0;
    /// Label carried by the output spectra.
    double temperature_K = 300.0;
};

struct NeutronDos {
    /// sum_k W_k g(E - w_k), W_k = sum_a sigma_a |e_ka|^2 / m_a.
    Spectrum raw;
    Spectrum normalized;
    std::vector<double> mode_weights;
};

/// Gaussian broadening integrated exactly over each bin. The normalization
/// cutoff is clipped to the grid's upper edge.
NeutronDos neutron_weighted_dos(const ModeSet& ms, const EnergyGrid& grid, const DosOptions& options = {});

} // namespace spclab::modes
