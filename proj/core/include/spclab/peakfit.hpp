#pragma once

/// @file
///
/// Single-peak least squares on a window: profile + linear baseline. Shared
/// by diffraction tracking and phonon-peak analysis.

#include <span>
#include <string_view>

namespace spclab::peakfit {

enum class Profile { gaussian, pseudo_voigt };

std::string_view to_string(Profile p);
Profile profile_from_string(std::string_view s);

/// Unit-height profile. The pseudo-Voigt is eta L + (1 - eta) G with a
/// shared FWHM.
double shape(Profile p, double x, double center, double fwhm, double eta = 0.0);

struct PeakFit {
    double center = 0.0;
    double center_err = 0.0;
    double fwhm = 0.0;
    double fwhm_err = 0.0;
    /// Peak height above the baseline.
    double amplitude = 0.0;
    double amplitude_err = 0.0;
    /// Lorentzian fraction; zero for Gaussian fits.
    double eta = 0.0;
    double eta_err = 0.0;
    double baseline_offset = 0.0;
    double baseline_slope = 0.0;
    double rms_residual = 0.0;
    /// amplitude > 3 rms_residual.
    bool detected = false;
};

/// Fits points with lo <= x <= hi. The center is confined to the window and
/// the FWHM to [min spacing, 2 (hi - lo)]. Throws ValidationError with fewer
/// than 7 points in the window, ConvergenceError when every start fails.
PeakFit fit_peak(std::span<const double> x, std::span<const double> y, double lo, double hi, Profile profile,
                 double center_guess);

} // namespace spclab::peakfit
