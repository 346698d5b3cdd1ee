#pragma once

/// @file
///
/// Diffraction peak tracking over temperature and isotropic volume
/// expansion from d-spacing ratios.

#include <optional>
#include <string>
#include <vector>

namespace spclab::lattice {

struct DiffractionPattern {
    /// d-spacings in Angstrom, monotone (either direction).
    std::vector<double> d_A;
    std::vector<double> intensity;
    double temperature_K = 0.0;

    void validate() const;
};

struct PeakSeed {
    double d0_A = 0.0;
    /// Fit window is d0 +/- half_width.
    double half_width_A = 0.0;
    std::string label;
};

struct PeakPoint {
    double temperature_K = 0.0;
    bool missing = false;
    double center_A = 0.0;
    double center_err_A = 0.0;
    double fwhm_A = 0.0;
    double fwhm_err_A = 0.0;
    double amplitude = 0.0;
};

struct PeakTrack {
    std::string label;
    /// Ascending temperature.
    std::vector<PeakPoint> points;
};

/// Gaussian + linear baseline per pattern, in temperature order; each window
/// is recentred on the previous successful fit. Points whose amplitude does
/// not exceed three times the residual noise are marked missing.
std::vector<PeakTrack> track_peaks(const std::vector<DiffractionPattern>& patterns,
                                   const std::vector<PeakSeed>& seeds);

/// (1 + dd)^3 - 1 for dd = d / d_ref - 1.
double isotropic_volume_change(double relative_d_change);

struct VolumePoint {
    double temperature_K = 0.0;
    /// Empty when no track has a valid point at this temperature.
    std::optional<double> dv_over_v;
    /// Sample standard deviation across tracks (0 with one track).
    double spread = 0.0;
    std::size_t n_tracks = 0;
};

struct VolumeTrack {
    std::vector<VolumePoint> points;
    /// Temperature whose d-spacings served as reference, when known.
    std::optional<double> reference_temperature_K;
    /// True for tracks whose reference came from their highest-temperature fit.
    std::vector<bool> reference_from_fit;
    std::vector<double> reference_d_A;
};

/// Per track dV/V = (d / d_ref)^3 - 1, combined as the mean across tracks.
/// A missing reference is replaced by the track's highest-temperature fit.
VolumeTrack volume_expansion(const std::vector<PeakTrack>& tracks,
                             const std::vector<std::optional<double>>& reference_d_A = {});

} // namespace spclab::lattice
