#pragma once

/// @file
///
/// Spin-lattice relaxation: T1 extraction from recovery traces, assembly of
/// 1/T1(T) series from mixed measurements, logarithmic slopes, and the
/// direct + local-mode and direct + Debye-Raman rate models.
///
/// All rate-model fits minimise sum_i [log10 model(T_i) - log10 rate_i]^2 with
/// positive parameters carried as logarithms.

#include <optional>
#include <string>
#include <vector>

#include "spclab/core.hpp"

namespace spclab::relax {

enum class TraceKind { inversion, saturation };
enum class Orientation { parallel, perpendicular, unspecified };
enum class Method { inversion, saturation, unspecified };

std::string_view to_string(TraceKind k);
std::string_view to_string(Orientation o);
std::string_view to_string(Method m);
TraceKind trace_kind_from_string(std::string_view s);
Orientation orientation_from_string(std::string_view s);
Method method_from_string(std::string_view s);

/// Polarization recovery after an inversion or saturation pulse.
struct RecoveryTrace {
    std::vector<double> delays_us;
    std::vector<double> signal;
    TraceKind kind = TraceKind::inversion;

    /// At least 8 points, delays positive and strictly increasing.
    void validate() const;
};

/// Fit of I(t) = I0 + A exp(-(t / T1)^beta), beta in [0.5, 1.5].
struct TraceFit {
    double t1_us = 0.0;
    double t1_err_us = 0.0;
    double beta = 1.0;
    double beta_err = 0.0;
    double amplitude = 0.0;
    double offset = 0.0;
    double rms_residual = 0.0;
};

inline constexpr double beta_min = 0.5;
inline constexpr double beta_max = 1.5;

/// Throws ValidationError("no decay detected") when the signal range does
/// not exceed three times its noise floor, ConvergenceError when the fit
/// fails.
TraceFit fit_recovery_trace(const RecoveryTrace& trace);

struct RatePoint {
    double temperature_K = 0.0;
    double rate_per_us = 0.0;
    std::optional<double> rate_err_per_us;
    Orientation orientation = Orientation::unspecified;
    Method method = Method::unspecified;

    void validate() const;
};

/// Relaxation rates sorted by temperature.
struct RateSeries {
    std::vector<RatePoint> points;
    std::string label;

    /// Sorted by T; (T, orientation, method) unique.
    void validate() const;
    std::vector<double> temperatures() const;
    std::vector<double> rates() const;
    RateSeries filtered_min_temperature(double t_floor_K) const;
};

/// Which measurement to keep at each temperature.
struct AssemblyPolicy {
    /// Saturation recovery preferred below this temperature, inversion at and above.
    double switch_temperature_K = 30.0;
    /// Keep only this orientation (unspecified points always pass).
    std::optional<Orientation> orientation;
    std::string label = "assembled";
};

/// One point per temperature: the preferred method if present, else the
/// other; remaining ties go to the smallest error. Output strictly
/// increasing in T. Throws ValidationError on an empty selection.
RateSeries assemble_rate_series(const std::vector<RatePoint>& points, const AssemblyPolicy& policy = {});

struct SlopePoint {
    double temperature_K;
    double slope;
};

/// d ln(rate) / d ln(T) by local linear regression over a sliding window of
/// `window` points (odd, >= 3); truncated windows at the ends.
std::vector<SlopePoint> log_slope(const RateSeries& series, int window = 5);

struct LocalMode {
    double amplitude_per_us = 0.0;
    double amplitude_err_per_us = 0.0;
    double energy_cm = 0.0;
    double energy_err_cm = 0.0;
};

struct LocalModeFit {
    double a_dir_per_us_per_K = 0.0;
    double a_dir_err = 0.0;
    bool include_direct = true;
    std::vector<LocalMode> modes;
    double rmse_log = 0.0;
    std::size_t n_points = 0;
    int starts = 0;
    std::vector<std::string> warnings;

    /// A_dir T + sum_k C_k e^x_k / (e^x_k - 1)^2.
    double rate(double temperature_K) const;
};

struct LocalModeOptions {
    int n_modes = 2;
    bool include_direct = true;
    /// Mode energies are confined to [e_min_cm, e_max_cm].
    double e_min_cm = 15.0;
    double e_max_cm = 600.0;
    /// Weight log residuals by 1 / sigma_log10 where errors are present.
    bool weighted = false;
    /// Modes closer than this are reported merged.
    double merge_threshold_cm = 5.0;
};

LocalModeFit fit_local_modes(const RateSeries& series, const LocalModeOptions& options = {});

/// I_8(y) = integral_0^y x^8 e^x / (e^x - 1)^2 dx by adaptive Gauss-Kronrod,
/// relative error below 1e-10.
double transport_integral_8(double y);

struct DebyeFit {
    double a_dir_per_us_per_K = 0.0;
    double a_dir_err = 0.0;
    /// Prefactor of C T^9 I_8(theta_D / T).
    double c_raman = 0.0;
    double c_raman_rel_err = 0.0;
    double theta_D_K = 0.0;
    double theta_D_err_K = 0.0;
    bool include_direct = true;
    double rmse_log = 0.0;
    std::size_t n_points = 0;

    double rate(double temperature_K) const;
};

struct DebyeOptions {
    bool include_direct = true;
    bool weighted = false;
    double theta_min_K = 5.0;
    double theta_max_K = 2000.0;
};

DebyeFit fit_debye_raman(const RateSeries& series, const DebyeOptions& options = {});

} // namespace spclab::relax
