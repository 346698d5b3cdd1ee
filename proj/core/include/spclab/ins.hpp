#pragma once

/// @file
///
/// Corrections that turn measured vibrational spectra into normalized
/// G_T(E): background subtraction, Bose population correction, an
/// incoherent multiphonon stand-in, Debye replacement of the elastic line,
/// normalization, and per-bin interpolation between measured temperatures.
///
/// The full pipeline runs in a fixed order:
/// background -> population -> multiphonon -> elastic line -> normalize.

#include <optional>

#include "spclab/core.hpp"

namespace spclab::ins {

struct CorrectionConfig {
    double elastic_cutoff_cm = 15.0;
    /// E_cutoff: the spectrum integrates to one over [0, E_cutoff].
    double normalization_cutoff_cm = 600.0;
    int multiphonon_order = 2;
    double multiphonon_tolerance = 1e-4;
    /// Effective Debye-Waller strength w of the incoherent expansion. Order k
    /// carries weight w^k / k!.
    double multiphonon_strength = 0.1;
    /// Permit an elastic cutoff outside [10, 20] cm^-1.
    bool allow_elastic_override = false;
    std::optional<Spectrum> background;

    void validate() const;
};

/// Carries the last iterate when the multiphonon iteration fails.
class MultiphononNotConverged : public ConvergenceError {
public:
    MultiphononNotConverged(const std::string& what, Spectrum last)
        : ConvergenceError(what), last_iterate(std::move(last)) {}
    Spectrum last_iterate;
};

/// intensity - background, clamped at 0. The background is resampled onto
/// the spectrum grid when the grids differ.
Spectrum subtract_background(const Spectrum& spec, const Spectrum& background);

/// Divides each bin by n(E, T) + 1 (neutron energy-loss side). Bins centred
/// at E <= 0 are left untouched and reported through warn().
Spectrum correct_population(const Spectrum& spec);

/// Removes multiphonon orders 2..K from a population-corrected spectrum by
/// self-consistent iteration. The returned one-phonon profile is rescaled to
/// the input's total intensity. Order 0 is a passthrough.
Spectrum correct_multiphonon(const Spectrum& spec, const CorrectionConfig& cfg);

/// Forward incoherent expansion used by correct_multiphonon: returns
/// sum_{k=1..K} N w^k / k! P_k where P_1 is the unit-area one-phonon shape
/// and N keeps the total equal to the one-phonon input area.
Spectrum multiphonon_expansion(const Spectrum& one_phonon, int order, double strength);

/// Replaces bins centred below the elastic cutoff by A E^2, with A fixed by
/// the value of the first bin at or above the cutoff.
Spectrum remove_elastic_line(const Spectrum& spec, const CorrectionConfig& cfg);

/// Scales so that the integral over [0, E_cutoff] is one. Bins above the
/// cutoff are kept and scaled by the same factor.
Spectrum normalize(const Spectrum& spec, const CorrectionConfig& cfg);
Spectrum normalize(const Spectrum& spec, double normalization_cutoff_cm);

/// Full correction chain for one spectrum.
Spectrum correct(const Spectrum& raw, const CorrectionConfig& cfg);
SpectrumSet correct(const SpectrumSet& raw, const CorrectionConfig& cfg);

/// Re-normalizes every member of a set with a different cutoff.
SpectrumSet renormalize(const SpectrumSet& set, double normalization_cutoff_cm);

/// Per-bin linear interpolation in temperature. A measured temperature
/// returns that spectrum exactly. Throws ValidationError("extrapolation
/// refused") outside the measured range.
Spectrum interpolate_temperature(const SpectrumSet& set, double temperature_K);

/// Measured spectrum closest in temperature (ties go to the lower one),
/// relabelled with the requested temperature.
Spectrum nearest_temperature(const SpectrumSet& set, double temperature_K);

} // namespace spclab::ins
