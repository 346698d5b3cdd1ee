#include "spclab/relax.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "fit_util.hpp"
#include "spclab/optimize.hpp"
#include "spclab/parallel.hpp"
#include "spclab/thermal.hpp"

namespace spclab::relax {

using optimize::Matrix;
using optimize::Vector;

std::string_view to_string(TraceKind k) { return k == TraceKind::inversion ? "inversion" : "saturation"; }

std::string_view to_string(Orientation o) {
    switch (o) {
    case Orientation::parallel: return "parallel";
    case Orientation::perpendicular: return "perpendicular";
    case Orientation::unspecified: return "unspecified";
    }
    return "unspecified";
}

std::string_view to_string(Method m) {
    switch (m) {
    case Method::inversion: return "inversion";
    case Method::saturation: return "saturation";
    case Method::unspecified: return "unspecified";
    }
    return "unspecified";
}

TraceKind trace_kind_from_string(std::string_view s) {
    if (s == "inversion") return TraceKind::inversion;
    if (s == "saturation") return TraceKind::saturation;
    throw ValidationError("unknown trace kind '" + std::string(s) + "' (expected inversion|saturation)");
}

Orientation orientation_from_string(std::string_view s) {
    if (s == "parallel") return Orientation::parallel;
    if (s == "perpendicular") return Orientation::perpendicular;
    if (s.empty() || s == "unspecified") return Orientation::unspecified;
    throw ValidationError("unknown orientation '" + std::string(s) + "'");
}

Method method_from_string(std::string_view s) {
    if (s == "inversion") return Method::inversion;
    if (s == "saturation") return Method::saturation;
    if (s.empty() || s == "unspecified") return Method::unspecified;
    throw ValidationError("unknown method '" + std::string(s) + "'");
}

void RecoveryTrace::validate() const {
    if (delays_us.size() != signal.size()) throw ValidationError("recovery trace: delay/signal length mismatch");
    if (delays_us.size() < 8) throw ValidationError("recovery trace needs at least 8 points");
    for (std::size_t i = 0; i < delays_us.size(); ++i) {
        if (!(delays_us[i] > 0.0)) throw ValidationError("recovery trace delays must be > 0");
        if (i > 0 && !(delays_us[i] > delays_us[i - 1]))
            throw ValidationError("recovery trace delays must be strictly increasing");
        if (!std::isfinite(signal[i])) throw ValidationError("recovery trace signal not finite");
    }
}

namespace {

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    double m = *mid;
    if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), mid));
    return m;
}

// Robust white-noise estimate from second differences.
double noise_floor(const std::vector<double>& s) {
    std::vector<double> d2;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) d2.push_back(std::abs(s[i + 1] - 2.0 * s[i] + s[i - 1]));
    return median(d2) / (0.6745 * std::sqrt(6.0));
}

double beta_of(double u) { return 1.0 + 0.5 * std::tanh(u); }

} // namespace

TraceFit fit_recovery_trace(const RecoveryTrace& trace) {
    trace.validate();
    const auto& t = trace.delays_us;
    const auto& s = trace.signal;
    const auto [mn, mx] = std::minmax_element(s.begin(), s.end());
    const double range = *mx - *mn;
    const double noise = noise_floor(s);
    if (!(range > 3.0 * noise) || range <= 1e-12 * std::max(1.0, std::abs(*mx))) {
        std::ostringstream os;
        os << "no decay detected (signal range " << range << ", noise floor " << noise << ")";
        throw ValidationError(os.str());
    }

    const std::size_t n = t.size();
    const double i0 = s.back();
    const double a0 = s.front() - i0;
    // First delay where the remaining amplitude drops below 1/e.
    double t1_seed = std::sqrt(t.front() * t.back());
    for (std::size_t i = 1; i < n; ++i) {
        const double prev = std::abs(s[i - 1] - i0);
        const double cur = std::abs(s[i] - i0);
        const double target = std::abs(a0) / std::exp(1.0);
        if (prev >= target && cur < target) {
            const double f = (prev - target) / std::max(prev - cur, 1e-300);
            t1_seed = std::exp(std::log(t[i - 1]) + f * (std::log(t[i]) - std::log(t[i - 1])));
            break;
        }
    }

    auto residual = [&](const Vector& p) {
        Vector r(static_cast<Eigen::Index>(n));
        const double t1 = std::exp(p[2]);
        const double beta = beta_of(p[3]);
        for (std::size_t i = 0; i < n; ++i)
            r[static_cast<Eigen::Index>(i)] = p[0] + p[1] * std::exp(-std::pow(t[i] / t1, beta)) - s[i];
        return r;
    };

    optimize::LmResult best;
    bool have = false;
    for (double scale : {1.0, 0.3, 3.0}) {
        Vector p0(4);
        p0 << i0, a0, std::log(t1_seed * scale), 0.0;
        optimize::LmResult r;
        try {
            r = optimize::levenberg_marquardt(residual, p0);
        } catch (const ConvergenceError&) {
            continue;
        }
        if (!r.converged || !std::isfinite(r.ssr)) continue;
        if (!have || detail::better_start(r.ssr, r.params, best.ssr, best.params)) {
            best = std::move(r);
            have = true;
        }
    }
    if (!have) {
        std::ostringstream os;
        os << "recovery trace fit did not converge (" << n << " points, signal range " << range << ")";
        throw ConvergenceError(os.str());
    }

    TraceFit fit;
    fit.offset = best.params[0];
    fit.amplitude = best.params[1];
    fit.t1_us = std::exp(best.params[2]);
    fit.beta = beta_of(best.params[3]);
    fit.rms_residual = std::sqrt(best.ssr / static_cast<double>(n));
    const Vector se = optimize::standard_errors(best.jacobian, best.ssr);
    fit.t1_err_us = fit.t1_us * se[2];
    const double th = std::tanh(best.params[3]);
    fit.beta_err = 0.5 * (1.0 - th * th) * se[3];
    if (fit.t1_us > 1e3 * t.back() || fit.t1_us < 1e-3 * t.front()) {
        std::ostringstream os;
        os << "recovery trace fit did not converge: T1 = " << fit.t1_us << " us outside the sampled delays, rms "
           << fit.rms_residual;
        throw ConvergenceError(os.str());
    }
    return fit;
}

void RatePoint::validate() const {
    if (!(temperature_K > 0.0) || !std::isfinite(temperature_K)) throw ValidationError("rate point: T_K must be > 0");
    if (!(rate_per_us > 0.0) || !std::isfinite(rate_per_us))
        throw ValidationError("rate point: rate_per_us must be > 0");
    if (rate_err_per_us && !(*rate_err_per_us >= 0.0)) throw ValidationError("rate point: err must be >= 0");
}

void RateSeries::validate() const {
    for (std::size_t i = 0; i < points.size(); ++i) {
        points[i].validate();
        if (i == 0) continue;
        const auto& a = points[i - 1];
        const auto& b = points[i];
        if (b.temperature_K < a.temperature_K) throw ValidationError("rate series not sorted by temperature");
        if (b.temperature_K == a.temperature_K && b.orientation == a.orientation && b.method == a.method)
            throw ValidationError("rate series has duplicate (T, orientation, method)");
    }
}

std::vector<double> RateSeries::temperatures() const {
    std::vector<double> v;
    v.reserve(points.size());
    for (const auto& p : points) v.push_back(p.temperature_K);
    return v;
}

std::vector<double> RateSeries::rates() const {
    std::vector<double> v;
    v.reserve(points.size());
    for (const auto& p : points) v.push_back(p.rate_per_us);
    return v;
}

RateSeries RateSeries::filtered_min_temperature(double t_floor_K) const {
    RateSeries out{{}, label};
    for (const auto& p : points)
        if (p.temperature_K >= t_floor_K) out.points.push_back(p);
    return out;
}

RateSeries assemble_rate_series(const std::vector<RatePoint>& points, const AssemblyPolicy& policy) {
    if (points.empty()) throw ValidationError("assemble_rate_series: no points");
    std::vector<RatePoint> pool;
    for (const auto& p : points) {
        p.validate();
        if (policy.orientation && p.orientation != Orientation::unspecified && p.orientation != *policy.orientation)
            continue;
        pool.push_back(p);
    }
    if (pool.empty()) throw ValidationError("assemble_rate_series: policy selected no points");
    std::stable_sort(pool.begin(), pool.end(),
                     [](const RatePoint& a, const RatePoint& b) { return a.temperature_K < b.temperature_K; });

    RateSeries out{{}, policy.label};
    for (std::size_t i = 0; i < pool.size();) {
        std::size_t j = i;
        while (j < pool.size() && std::abs(pool[j].temperature_K - pool[i].temperature_K) <=
                                      1e-9 * std::max(1.0, pool[i].temperature_K))
            ++j;
        const Method preferred =
            pool[i].temperature_K < policy.switch_temperature_K ? Method::saturation : Method::inversion;
        const bool has_preferred =
            std::any_of(pool.begin() + static_cast<std::ptrdiff_t>(i), pool.begin() + static_cast<std::ptrdiff_t>(j),
                        [&](const RatePoint& p) { return p.method == preferred; });
        const RatePoint* pick = nullptr;
        auto err_of = [](const RatePoint& p) {
            return p.rate_err_per_us.value_or(std::numeric_limits<double>::infinity());
        };
        for (std::size_t k = i; k < j; ++k) {
            const auto& p = pool[k];
            if (has_preferred && p.method != preferred) continue;
            if (!pick || err_of(p) < err_of(*pick)) pick = &p;
        }
        out.points.push_back(*pick);
        i = j;
    }
    return out;
}

std::vector<SlopePoint> log_slope(const RateSeries& series, int window) {
    const auto n = series.points.size();
    if (n < 3) throw ValidationError("log_slope needs at least 3 points");
    if (window < 3 || window % 2 == 0) throw ValidationError("log_slope window must be odd and >= 3");
    if (n < static_cast<std::size_t>(window)) throw ValidationError("log_slope: fewer points than the window");
    const auto h = static_cast<std::size_t>(window / 2);
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = std::log(series.points[i].temperature_K);
        y[i] = std::log(series.points[i].rate_per_us);
    }
    std::vector<SlopePoint> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i >= h ? i - h : 0;
        const std::size_t hi = std::min(n - 1, i + h);
        const double m = static_cast<double>(hi - lo + 1);
        double sx = 0, sy = 0;
        for (std::size_t k = lo; k <= hi; ++k) {
            sx += x[k];
            sy += y[k];
        }
        const double mx = sx / m, my = sy / m;
        double sxx = 0, sxy = 0;
        for (std::size_t k = lo; k <= hi; ++k) {
            sxx += (x[k] - mx) * (x[k] - mx);
            sxy += (x[k] - mx) * (y[k] - my);
        }
        if (!(sxx > 0.0)) throw ValidationError("log_slope: repeated temperatures in window");
        out.push_back({series.points[i].temperature_K, sxy / sxx});
    }
    return out;
}

// --- local-mode model ---------------------------------------------------------

double LocalModeFit::rate(double T) const {
    double r = include_direct ? a_dir_per_us_per_K * T : 0.0;
    for (const auto& m : modes) r += m.amplitude_per_us * thermal::two_phonon_factor(m.energy_cm, T);
    return r;
}

namespace {

struct LogData {
    std::vector<double> T;
    std::vector<double> log10_rate;
    std::vector<double> weight;
    Eigen::VectorXd rate;
};

LogData prepare(const RateSeries& series, bool weighted) {
    series.validate();
    LogData d;
    const auto n = series.points.size();
    d.rate.resize(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const auto& p = series.points[i];
        d.T.push_back(p.temperature_K);
        d.log10_rate.push_back(std::log10(p.rate_per_us));
        d.rate[static_cast<Eigen::Index>(i)] = p.rate_per_us;
        double w = 1.0;
        if (weighted && p.rate_err_per_us && *p.rate_err_per_us > 0.0)
            w = p.rate_per_us * std::log(10.0) / *p.rate_err_per_us;
        d.weight.push_back(w);
    }
    return d;
}

double unweighted_rmse(const Vector& r, const LogData& d) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < r.size(); ++i) {
        const double u = r[i] / d.weight[static_cast<std::size_t>(i)];
        acc += u * u;
    }
    return std::sqrt(acc / static_cast<double>(r.size()));
}

// Parameter layout: [ln A_dir]? then (ln C_k, u_k) per mode.
struct LocalModeModel {
    const LogData& data;
    bool direct;
    int n_modes;
    detail::LogBounded energy;

    Vector residual(const Vector& p) const {
        Vector r(static_cast<Eigen::Index>(data.T.size()));
        for (std::size_t i = 0; i < data.T.size(); ++i) {
            const double T = data.T[i];
            double m = 0.0;
            Eigen::Index k = 0;
            if (direct) m += std::exp(p[k++]) * T;
            for (int j = 0; j < n_modes; ++j) {
                const double c = std::exp(p[k++]);
                const double e = energy.value(p[k++]);
                m += c * thermal::two_phonon_factor(e, T);
            }
            r[static_cast<Eigen::Index>(i)] =
                data.weight[i] * (std::log10(std::max(m, 1e-300)) - data.log10_rate[i]);
        }
        return r;
    }
};

} // namespace

LocalModeFit fit_local_modes(const RateSeries& series, const LocalModeOptions& opt) {
    if (opt.n_modes < 1 || opt.n_modes > 3) throw ValidationError("fit_local_modes: n_modes must be 1, 2 or 3");
    if (!(opt.e_min_cm > 0.0) || !(opt.e_max_cm > opt.e_min_cm))
        throw ValidationError("fit_local_modes: need 0 < e_min_cm < e_max_cm");
    const LogData data = prepare(series, opt.weighted);
    const std::size_t n = data.T.size();
    const int n_par = (opt.include_direct ? 1 : 0) + 2 * opt.n_modes;
    if (n < static_cast<std::size_t>(n_par) + 1) throw ValidationError("fit_local_modes: too few points for model");

    const LocalModeModel model{data, opt.include_direct, opt.n_modes, {opt.e_min_cm, opt.e_max_cm}};
    auto residual = [&](const Vector& p) { return model.residual(p); };

    // Deterministic start list: combinations of log-spaced energy seeds.
    const auto seeds = detail::log_spaced(opt.e_min_cm * 1.25, opt.e_max_cm / 1.25, 8);
    std::vector<std::vector<double>> energy_starts;
    if (opt.n_modes == 1) {
        for (double e : seeds) energy_starts.push_back({e});
    } else if (opt.n_modes == 2) {
        for (std::size_t a = 0; a < seeds.size(); ++a)
            for (std::size_t b = a + 1; b < seeds.size(); ++b) energy_starts.push_back({seeds[a], seeds[b]});
    } else {
        for (std::size_t a = 0; a < seeds.size(); ++a)
            for (std::size_t b = a + 1; b < seeds.size(); ++b)
                for (std::size_t c = b + 1; c < seeds.size(); ++c)
                    energy_starts.push_back({seeds[a], seeds[b], seeds[c]});
    }

    std::vector<Vector> starts;
    for (const auto& es : energy_starts) {
        Eigen::MatrixXd basis(static_cast<Eigen::Index>(n), (opt.include_direct ? 1 : 0) + opt.n_modes);
        for (std::size_t i = 0; i < n; ++i) {
            Eigen::Index c = 0;
            if (opt.include_direct) basis(static_cast<Eigen::Index>(i), c++) = data.T[i];
            for (double e : es) basis(static_cast<Eigen::Index>(i), c++) = thermal::two_phonon_factor(e, data.T[i]);
        }
        const auto amp = detail::positive_amplitude_guess(basis, data.rate);
        Vector p(n_par);
        Eigen::Index k = 0;
        std::size_t a = 0;
        if (opt.include_direct) p[k++] = std::log(amp[a++]);
        for (double e : es) {
            p[k++] = std::log(amp[a++]);
            p[k++] = model.energy.inverse(e);
        }
        starts.push_back(std::move(p));
    }

    // Nested starts from the (n-1)-mode optimum keep the residual from
    // increasing with the mode count.
    if (opt.n_modes > 1) {
        LocalModeOptions smaller = opt;
        smaller.n_modes = opt.n_modes - 1;
        try {
            const LocalModeFit prev = fit_local_modes(series, smaller);
            for (double e_new : seeds) {
                Vector p(n_par);
                Eigen::Index k = 0;
                if (opt.include_direct) p[k++] = std::log(std::max(prev.a_dir_per_us_per_K, 1e-300));
                for (const auto& m : prev.modes) {
                    p[k++] = std::log(std::max(m.amplitude_per_us, 1e-300));
                    p[k++] = model.energy.inverse(m.energy_cm);
                }
                p[k++] = std::log(1e-12 * data.rate.minCoeff() /
                                  std::max(thermal::two_phonon_factor(e_new, data.T.back()), 1e-300));
                p[k++] = model.energy.inverse(e_new);
                starts.push_back(std::move(p));
            }
        } catch (const Error&) {
        }
    }

    std::vector<optimize::LmResult> results(starts.size());
    std::vector<char> ok(starts.size(), 0);
    parallel_for(starts.size(), [&](std::size_t i) {
        try {
            results[i] = optimize::levenberg_marquardt(residual, starts[i]);
            ok[i] = std::isfinite(results[i].ssr);
        } catch (const ConvergenceError&) {
        }
    });
    const optimize::LmResult* best = nullptr;
    for (std::size_t i = 0; i < results.size(); ++i) {
        if (!ok[i]) continue;
        if (!best || detail::better_start(results[i].ssr, results[i].params, best->ssr, best->params))
            best = &results[i];
    }
    if (!best) throw ConvergenceError("fit_local_modes: no start converged");

    const Vector se = optimize::standard_errors(best->jacobian, best->ssr);
    LocalModeFit fit;
    fit.include_direct = opt.include_direct;
    fit.n_points = n;
    fit.starts = static_cast<int>(starts.size());
    fit.rmse_log = unweighted_rmse(best->residuals, data);
    Eigen::Index k = 0;
    if (opt.include_direct) {
        fit.a_dir_per_us_per_K = std::exp(best->params[k]);
        fit.a_dir_err = fit.a_dir_per_us_per_K * se[k];
        ++k;
    }
    for (int j = 0; j < opt.n_modes; ++j) {
        LocalMode m;
        m.amplitude_per_us = std::exp(best->params[k]);
        m.amplitude_err_per_us = m.amplitude_per_us * se[k];
        ++k;
        m.energy_cm = model.energy.value(best->params[k]);
        m.energy_err_cm = std::abs(model.energy.derivative(best->params[k])) * se[k];
        ++k;
        fit.modes.push_back(m);
    }
    std::sort(fit.modes.begin(), fit.modes.end(),
              [](const LocalMode& a, const LocalMode& b) { return a.energy_cm < b.energy_cm; });

    std::vector<LocalMode> merged;
    for (const auto& m : fit.modes) {
        if (!merged.empty() && std::abs(m.energy_cm - merged.back().energy_cm) < opt.merge_threshold_cm) {
            auto& prev = merged.back();
            std::ostringstream os;
            os << "degenerate local modes at " << prev.energy_cm << " and " << m.energy_cm
               << " cm^-1 reported merged";
            fit.warnings.push_back(os.str());
            warn(os.str());
            const double c = prev.amplitude_per_us + m.amplitude_per_us;
            prev.energy_cm = (prev.amplitude_per_us * prev.energy_cm + m.amplitude_per_us * m.energy_cm) / c;
            prev.energy_err_cm = std::hypot(prev.energy_err_cm, m.energy_err_cm);
            prev.amplitude_per_us = c;
            prev.amplitude_err_per_us = std::hypot(prev.amplitude_err_per_us, m.amplitude_err_per_us);
        } else {
            merged.push_back(m);
        }
    }
    fit.modes = std::move(merged);
    return fit;
}

// --- Debye-Raman model ----------------------------------------------------------

double transport_integral_8(double y) {
    if (!(y >= 0.0)) throw DomainError("transport_integral_8: y must be >= 0");
    if (y == 0.0) return 0.0;
    // Beyond x = 250 the integrand is below 1e-80 of its peak.
    const double upper = std::min(y, 250.0);
    auto f = [](double x) {
        if (x <= 0.0) return 0.0;
        const double d = -std::expm1(-x);
        const double x2 = x * x;
        const double x4 = x2 * x2;
        return x4 * x4 * std::exp(-x) / (d * d);
    };
    if (upper < 1e-3) {
        // x^6 - x^8 / 12 + ... integrated.
        const double u7 = std::pow(upper, 7);
        return u7 / 7.0 - u7 * upper * upper / 108.0;
    }
    double err = 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, upper, 20, 1e-12, &err);
}

double DebyeFit::rate(double T) const {
    double r = include_direct ? a_dir_per_us_per_K * T : 0.0;
    return r + c_raman * std::pow(T, 9) * transport_integral_8(theta_D_K / T);
}

DebyeFit fit_debye_raman(const RateSeries& series, const DebyeOptions& opt) {
    const LogData data = prepare(series, opt.weighted);
    const std::size_t n = data.T.size();
    const int n_par = (opt.include_direct ? 1 : 0) + 2;
    if (n < static_cast<std::size_t>(n_par) + 1) throw ValidationError("fit_debye_raman: too few points for model");
    const detail::LogBounded theta(opt.theta_min_K, opt.theta_max_K);

    // Raman term carried as C' (T / theta)^9 I_8(theta / T), C' = C theta^9.
    auto raman_shape = [](double T, double th) {
        return std::pow(T / th, 9) * transport_integral_8(th / T);
    };
    auto residual = [&](const Vector& p) {
        Vector r(static_cast<Eigen::Index>(n));
        Eigen::Index k = 0;
        const double a = opt.include_direct ? std::exp(p[k++]) : 0.0;
        const double c = std::exp(p[k++]);
        const double th = theta.value(p[k++]);
        for (std::size_t i = 0; i < n; ++i) {
            const double m = a * data.T[i] + c * raman_shape(data.T[i], th);
            r[static_cast<Eigen::Index>(i)] =
                data.weight[i] * (std::log10(std::max(m, 1e-300)) - data.log10_rate[i]);
        }
        return r;
    };

    std::vector<Vector> starts;
    for (double th : detail::log_spaced(opt.theta_min_K * 1.5, opt.theta_max_K / 1.5, 8)) {
        Eigen::MatrixXd basis(static_cast<Eigen::Index>(n), n_par - 1);
        for (std::size_t i = 0; i < n; ++i) {
            Eigen::Index c = 0;
            if (opt.include_direct) basis(static_cast<Eigen::Index>(i), c++) = data.T[i];
            basis(static_cast<Eigen::Index>(i), c++) = raman_shape(data.T[i], th);
        }
        const auto amp = detail::positive_amplitude_guess(basis, data.rate);
        Vector p(n_par);
        Eigen::Index k = 0;
        std::size_t a = 0;
        if (opt.include_direct) p[k++] = std::log(amp[a++]);
        p[k++] = std::log(amp[a++]);
        p[k++] = theta.inverse(th);
        starts.push_back(std::move(p));
    }

    std::vector<optimize::LmResult> results(starts.size());
    std::vector<char> ok(starts.size(), 0);
    parallel_for(starts.size(), [&](std::size_t i) {
        try {
            results[i] = optimize::levenberg_marquardt(residual, starts[i]);
            ok[i] = std::isfinite(results[i].ssr);
        } catch (const ConvergenceError&) {
        }
    });
    const optimize::LmResult* best = nullptr;
    for (std::size_t i = 0; i < results.size(); ++i) {
        if (!ok[i]) continue;
        if (!best || detail::better_start(results[i].ssr, results[i].params, best->ssr, best->params))
            best = &results[i];
    }
    if (!best) throw ConvergenceError("fit_debye_raman: no start converged");

    const Matrix cov = optimize::covariance(best->jacobian, best->ssr);
    DebyeFit fit;
    fit.include_direct = opt.include_direct;
    fit.n_points = n;
    fit.rmse_log = unweighted_rmse(best->residuals, data);
    Eigen::Index k = 0;
    if (opt.include_direct) {
        fit.a_dir_per_us_per_K = std::exp(best->params[k]);
        fit.a_dir_err = fit.a_dir_per_us_per_K * std::sqrt(std::max(cov(k, k), 0.0));
        ++k;
    }
    const Eigen::Index kc = k++;
    const Eigen::Index kt = k;
    const double c_prime = std::exp(best->params[kc]);
    fit.theta_D_K = theta.value(best->params[kt]);
    fit.theta_D_err_K = std::abs(theta.derivative(best->params[kt])) * std::sqrt(std::max(cov(kt, kt), 0.0));
    fit.c_raman = c_prime / std::pow(fit.theta_D_K, 9);
    // ln C = ln C' - 9 ln theta
    const double dlnth = theta.derivative(best->params[kt]) / fit.theta_D_K;
    const double var = cov(kc, kc) + 81.0 * dlnth * dlnth * cov(kt, kt) - 18.0 * dlnth * cov(kc, kt);
    fit.c_raman_rel_err = std::sqrt(std::max(var, 0.0));
    return fit;
}

} // namespace spclab::relax
