#pragma once

/// @file
///
/// Energy-windowed spin-phonon coupling coefficients. The two-phonon Raman
/// rate is modelled as
///
///   rate(T) = integral lambda(E) G_T(E) e^x / (e^x - 1)^2 dE,  x = E / k_B T
///
/// with lambda piecewise constant over energy windows. The rate is linear in
/// the window coefficients: rate(T) = sum_w lambda_w B_w(T).

#include <optional>
#include <string>
#include <vector>

#include "spclab/core.hpp"
#include "spclab/relax.hpp"

namespace spclab::spc {

inline constexpr double default_e_max_cm = 600.0;

struct LambdaProfile {
    /// Window edges in cm^-1; the last edge is the upper integration limit.
    std::vector<double> edges_cm;
    std::vector<double> lambdas_per_us;
    /// Spectral weight below this energy is ignored (acoustic exclusion).
    std::optional<double> excluded_below_cm;

    void validate() const;
    std::size_t windows() const { return lambdas_per_us.size(); }
    /// Integration interval of window w after applying the exclusion floor.
    std::pair<double, double> window_range(std::size_t w) const;
};

/// How G_T is obtained at temperatures between measured spectra.
enum class SpectrumMode {
    /// Per-bin linear interpolation; out-of-range temperatures are refused.
    interpolate,
    /// Nearest measured spectrum held fixed; any temperature is accepted.
    nearest,
};

std::string_view to_string(SpectrumMode m);
SpectrumMode spectrum_mode_from_string(std::string_view s);

/// B_w(T) for every window of the profile (lambdas ignored).
std::vector<double> window_basis(const LambdaProfile& profile, const SpectrumSet& set, double temperature_K,
                                 SpectrumMode mode = SpectrumMode::interpolate);

/// Raman rate in us^-1 (no direct term).
double forward_rate(const LambdaProfile& profile, const SpectrumSet& set, double temperature_K,
                    SpectrumMode mode = SpectrumMode::interpolate);

/// Per-window contributions lambda_w B_w(T).
std::vector<double> window_contributions(const LambdaProfile& profile, const SpectrumSet& set,
                                         double temperature_K, SpectrumMode mode = SpectrumMode::interpolate);

enum class CrossoverStatus { found, none, degenerate };
std::string_view to_string(CrossoverStatus s);

/// Temperature where windows w and w + 1 contribute equally.
struct Crossover {
    std::size_t lower_window = 0;
    CrossoverStatus status = CrossoverStatus::none;
    double temperature_K = 0.0;
};

struct FitOptions {
    /// Rate points below this temperature are dropped.
    double t_floor_K = 10.0;
    /// Adds A_dir T to the model.
    bool include_direct = false;
    SpectrumMode mode = SpectrumMode::interpolate;
    /// Weight log residuals by the reported rate errors.
    bool weighted = false;
    std::optional<double> excluded_below_cm;
    /// Recorded in the result; the set is assumed normalized with this cutoff.
    double normalization_cutoff_cm = 600.0;
};

struct SpcFit {
    LambdaProfile profile;
    std::vector<double> lambda_err_per_us;
    double a_dir_per_us_per_K = 0.0;
    double a_dir_err = 0.0;
    bool include_direct = false;
    double rmse_log = 0.0;
    std::size_t n_points = 0;
    /// Temperature range of the fitted points.
    double t_min_K = 0.0;
    double t_max_K = 0.0;
    std::vector<Crossover> crossovers;
    std::string representation;
    double normalization_cutoff_cm = 600.0;
    SpectrumMode mode = SpectrumMode::interpolate;

    /// Model rate including the direct term when fitted.
    double rate(const SpectrumSet& set, double temperature_K) const;
};

/// Least squares in log10 rate over log lambda. Throws ValidationError naming
/// the window when a window has zero spectral weight at every temperature.
SpcFit fit_lambda_windows(const relax::RateSeries& series, const SpectrumSet& set,
                          const std::vector<double>& edges_cm, const FitOptions& options = {});

struct CutoffScanOptions {
    FitOptions fit;
    double e_max_cm = default_e_max_cm;
    /// Refinement around the coarse minimum: step divided by this factor,
    /// within one coarse step on either side. 1 disables refinement.
    int refine_factor = 5;
    /// Scans whose relative rmse range is below this are weakly identified.
    double flat_threshold = 0.25;
};

struct CutoffScan {
    std::vector<double> cutoffs_cm;
    /// rmse_log[c][s] for cutoff c and series s; empty when the fit failed.
    std::vector<std::vector<std::optional<double>>> rmse_log;
    /// Sum over series; empty when any series failed at that cutoff.
    std::vector<std::optional<double>> total_rmse_log;
    /// Number of leading entries that form the coarse grid.
    std::size_t coarse_size = 0;
    double selected_cutoff_cm = 0.0;
    bool weakly_identified = false;
    bool unique_coarse_minimum = false;
    std::vector<std::string> failures;
};

/// 25, 35, ..., 575 cm^-1.
std::vector<double> default_cutoff_grid();

/// Fits edges (0, cutoff, e_max) per grid point and selects the cutoff with
/// the lowest summed rmse_log (ties to the lower cutoff). At least half of the
/// coarse grid must succeed.
CutoffScan cutoff_scan(const std::vector<relax::RateSeries>& series, const SpectrumSet& set,
                       const std::vector<double>& grid_cm, const CutoffScanOptions& options = {});

/// lambda(E) G_T(E) e^x / (e^x - 1)^2 per bin, in us^-1 per cm^-1. Partial
/// bins at window edges carry their overlap fraction, so integrate() over
/// the grid reproduces forward_rate.
std::vector<double> spectral_density(const LambdaProfile& profile, const SpectrumSet& set, double temperature_K,
                                     SpectrumMode mode = SpectrumMode::interpolate);

/// Crossovers for every adjacent window pair, searched over the overlap of
/// the fitted temperature range with the set's range (the set's range when
/// the fit carries none). Bisection to 0.01 K.
std::vector<Crossover> crossover_temperatures(const LambdaProfile& profile, const SpectrumSet& set, double t_lo_K,
                                              double t_hi_K, SpectrumMode mode = SpectrumMode::interpolate);
std::vector<Crossover> crossover_temperatures(const SpcFit& fit, const SpectrumSet& set);

struct NamedSet {
    std::string name;
    SpectrumSet set;
};

struct SweepCell {
    std::string set_name;
    double normalization_cutoff_cm = 0.0;
    std::optional<SpcFit> fit;
    std::string error;
    /// lambda_{w+1} / lambda_w for adjacent windows.
    std::vector<double> lambda_ratios;
};

/// Every (set, normalization cutoff) pair: the set is re-normalized with the
/// cutoff and fitted with the given edges. Failing cells record their error.
std::vector<SweepCell> robustness_sweep(const relax::RateSeries& series, const std::vector<NamedSet>& sets,
                                        const std::vector<double>& normalization_cutoffs_cm,
                                        const std::vector<double>& edges_cm, const FitOptions& options = {});

} // namespace spclab::spc
