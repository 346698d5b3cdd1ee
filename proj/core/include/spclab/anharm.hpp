#pragma once

/// @file
///
/// Phonon peak centres and widths over temperature, and Grueneisen
/// parameters from dE/E = -gamma dV/V.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spclab/core.hpp"
#include "spclab/lattice.hpp"
#include "spclab/peakfit.hpp"

namespace spclab::anharm {

struct PhononSeed {
    double center_cm = 0.0;
    /// Fit window is center +/- half_width.
    double half_width_cm = 0.0;
    std::string label;
};

struct PhononPoint {
    double temperature_K = 0.0;
    bool missing = false;
    double center_cm = 0.0;
    double center_err_cm = 0.0;
    double fwhm_cm = 0.0;
    double fwhm_err_cm = 0.0;
    double amplitude = 0.0;
    double eta = 0.0;
    double eta_err = 0.0;
    /// Relative to the lowest-temperature detected point.
    double d_center_cm = 0.0;
    double d_fwhm_cm = 0.0;
};

struct PhononPeakTrack {
    std::string label;
    peakfit::Profile profile = peakfit::Profile::gaussian;
    std::vector<PhononPoint> points;
    /// Temperature of the first detected point; nullopt if none.
    std::optional<double> base_temperature_K;
};

struct PeakFitOptions {
    peakfit::Profile profile = peakfit::Profile::gaussian;
    /// Instrument FWHM removed in quadrature from fitted widths.
    std::optional<double> resolution_fwhm_cm;
};

/// Tracks each seed through the set in temperature order, recentring on the
/// previous fit. Seeds whose windows intersect are fitted anyway and
/// reported through warn() as an unresolved overlap.
std::vector<PhononPeakTrack> fit_phonon_peaks(const SpectrumSet& set, const std::vector<PhononSeed>& seeds,
                                              const PeakFitOptions& options = {});

struct GruneisenResult {
    /// Positive for softening under expansion.
    double gamma = 0.0;
    double gamma_err = 0.0;
    /// RMS residual of an unconstrained straight-line fit.
    double linearity_residual = 0.0;
    /// RMS residual of the origin-constrained fit.
    double origin_residual = 0.0;
    double mode_energy_cm = 0.0;
    double base_temperature_K = 0.0;
    std::size_t n_points = 0;
};

/// Origin-constrained regression on (dV/V, dE/E) pairs. Throws
/// ValidationError("no expansion signal") if every |dV/V| is below 1e-12.
GruneisenResult gruneisen(std::span<const double> dv_over_v, std::span<const double> de_over_e);

/// Pairs a peak track with a volume track. dV/V is interpolated linearly in
/// temperature and rebased to the track's base temperature; points outside
/// the volume track's range are skipped. Needs at least 3 overlapping
/// temperatures.
GruneisenResult gruneisen(const PhononPeakTrack& track, const lattice::VolumeTrack& volume);

} // namespace spclab::anharm
