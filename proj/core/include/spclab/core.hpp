#pragma once

/// @file
///
/// Shared domain types: physical constants, energy grids, spectra and the
/// bin quadrature everything else integrates with.
///
/// Units are fixed across the library: energies in cm^-1, temperatures in K,
/// rates in us^-1, lengths in Angstrom. Conversions happen only at I/O.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spclab/error.hpp"

namespace spclab {

namespace constants {
/// Boltzmann constant in cm^-1 / K, k_B / (h c) from the exact SI values.
inline constexpr double kB_cm_per_K = 0.6950348004861274;
inline constexpr double hbar_J_s = 1.054571817e-34;
inline constexpr double amu_kg = 1.66053906660e-27;
inline constexpr double c_cm_per_s = 29979245800.0;
/// Angular frequency (rad/s) of a 1 cm^-1 excitation: 2 pi c.
inline constexpr double cm_to_rad_per_s = 2.0 * 3.14159265358979323846 * c_cm_per_s;
inline constexpr double pi = 3.14159265358979323846;
} // namespace constants

/// Strictly increasing bin edges in cm^-1 with the first edge >= 0.
class EnergyGrid {
public:
    EnergyGrid() = default;
    explicit EnergyGrid(std::vector<double> edges);

    /// n equal bins spanning [lo, hi].
    static EnergyGrid uniform(double lo, double hi, std::size_t n);
    /// Reconstructs edges from bin centers (midpoints between centers, the
    /// outer half-widths mirrored). The first edge is clamped at 0.
    static EnergyGrid from_centers(std::span<const double> centers);

    std::size_t size() const { return edges_.empty() ? 0 : edges_.size() - 1; }
    const std::vector<double>& edges() const { return edges_; }
    const std::vector<double>& centers() const { return centers_; }
    double width(std::size_t i) const { return edges_[i + 1] - edges_[i]; }
    double lo() const { return edges_.front(); }
    double hi() const { return edges_.back(); }
    bool is_uniform(double rel_tol = 1e-9) const;

    /// Length of [a, b] that falls inside bin i.
    double overlap(std::size_t i, double a, double b) const;

    friend bool operator==(const EnergyGrid& a, const EnergyGrid& b) { return a.edges_ == b.edges_; }

private:
    std::vector<double> edges_;
    std::vector<double> centers_;
};

enum class Provenance { raw, corrected, normalized, dos };

std::string_view to_string(Provenance p);
Provenance provenance_from_string(std::string_view s);

/// Vibrational intensity on an energy grid at one temperature. Intensity is
/// stored as a density per cm^-1 so integrals do not depend on the binning.
struct Spectrum {
    EnergyGrid grid;
    std::vector<double> intensity;
    double temperature_K = 0.0;
    Provenance provenance = Provenance::raw;

    /// Throws ValidationError on length mismatch, non-finite values or T <= 0.
    void validate() const;
    bool non_negative() const;
};

/// Temperature-indexed family of spectra on one shared grid.
class SpectrumSet {
public:
    SpectrumSet() = default;
    /// Sorts by temperature. Throws on grid mismatch or duplicate temperatures.
    explicit SpectrumSet(std::vector<Spectrum> spectra, std::string representation = "instrument");

    const std::vector<Spectrum>& spectra() const { return spectra_; }
    const EnergyGrid& grid() const;
    const std::string& representation() const { return representation_; }
    std::size_t size() const { return spectra_.size(); }
    bool empty() const { return spectra_.empty(); }
    double t_min() const;
    double t_max() const;
    std::vector<double> temperatures() const;

private:
    std::vector<Spectrum> spectra_;
    std::string representation_ = "instrument";
};

/// Conservative rebinning onto `target`. Target bins outside the source
/// range read as zero. Throws ValidationError("disjoint grids") when the two
/// grids share no interval.
Spectrum resample(const Spectrum& spec, const EnergyGrid& target);

/// Midpoint rule on bins: sum of value_i * width_i.
double integrate(std::span<const double> density, const EnergyGrid& grid);

/// Integral of a per-bin density restricted to [a, b], counting partial bins
/// by their overlap length.
double integrate_range(std::span<const double> density, const EnergyGrid& grid, double a, double b);

} // namespace spclab
