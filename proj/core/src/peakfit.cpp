#include "spclab/peakfit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "fit_util.hpp"
#include "spclab/error.hpp"
#include "spclab/optimize.hpp"

namespace spclab::peakfit {

using optimize::Vector;

std::string_view to_string(Profile p) { return p == Profile::gaussian ? "gaussian" : "pseudo-voigt"; }

Profile profile_from_string(std::string_view s) {
    if (s == "gaussian") return Profile::gaussian;
    if (s == "pseudo-voigt" || s == "pseudo_voigt" || s == "voigt") return Profile::pseudo_voigt;
    throw ValidationError("unknown peak profile '" + std::string(s) + "' (expected gaussian|pseudo-voigt)");
}

double shape(Profile p, double x, double c, double f, double eta) {
    const double z = (x - c) / f;
    const double g = std::exp(-4.0 * std::log(2.0) * z * z);
    if (p == Profile::gaussian) return g;
    const double l = 1.0 / (1.0 + 4.0 * z * z);
    return eta * l + (1.0 - eta) * g;
}

PeakFit fit_peak(std::span<const double> x_all, std::span<const double> y_all, double lo, double hi, Profile profile,
                 double center_guess) {
    if (x_all.size() != y_all.size()) throw ValidationError("peak fit: x/y length mismatch");
    if (!(hi > lo)) throw ValidationError("peak fit: empty window");
    std::vector<double> x, y;
    for (std::size_t i = 0; i < x_all.size(); ++i) {
        if (x_all[i] >= lo && x_all[i] <= hi) {
            x.push_back(x_all[i]);
            y.push_back(y_all[i]);
        }
    }
    if (x.size() < 7) {
        std::ostringstream os;
        os << "peak window [" << lo << ", " << hi << "] holds " << x.size() << " points; at least 7 are required";
        throw ValidationError(os.str());
    }
    // Sort by x so spacing and endpoints are meaningful for decreasing grids.
    std::vector<std::size_t> order(x.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> xs(x.size()), ys(x.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        xs[i] = x[order[i]];
        ys[i] = y[order[i]];
    }
    const std::size_t n = xs.size();
    double min_dx = hi - lo;
    for (std::size_t i = 1; i < n; ++i)
        if (xs[i] > xs[i - 1]) min_dx = std::min(min_dx, xs[i] - xs[i - 1]);
    const double xm = 0.5 * (lo + hi);
    const double span_w = hi - lo;
    const detail::LogBounded width(min_dx, 2.0 * span_w);
    const bool pv = profile == Profile::pseudo_voigt;
    const Eigen::Index np = pv ? 6 : 5;

    auto center_of = [&](double v) { return lo + span_w * detail::logistic(v); };
    auto center_inv = [&](double c) {
        const double s = std::clamp((c - lo) / span_w, 1e-6, 1.0 - 1e-6);
        return detail::logit(s);
    };
    auto residual = [&](const Vector& p) {
        Vector r(static_cast<Eigen::Index>(n));
        const double c = center_of(p[1]);
        const double f = width.value(p[2]);
        const double eta = pv ? std::pow(std::sin(p[5]), 2) : 0.0;
        for (std::size_t i = 0; i < n; ++i)
            r[static_cast<Eigen::Index>(i)] =
                p[0] * shape(profile, xs[i], c, f, eta) + p[3] + p[4] * (xs[i] - xm) - ys[i];
        return r;
    };

    // Baseline through the window endpoints.
    const double b1 = (ys.back() - ys.front()) / (xs.back() - xs.front());
    const double b0 = 0.5 * (ys.back() + ys.front()) - b1 * (0.5 * (xs.back() + xs.front()) - xm);
    std::size_t imax = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (ys[i] - (b0 + b1 * (xs[i] - xm)) > ys[imax] - (b0 + b1 * (xs[imax] - xm))) imax = i;
    const double a0 = ys[imax] - (b0 + b1 * (xs[imax] - xm));
    double half_width = 0.0;
    {
        std::size_t l = imax, r = imax;
        while (l > 0 && ys[l] - (b0 + b1 * (xs[l] - xm)) > 0.5 * a0) --l;
        while (r + 1 < n && ys[r] - (b0 + b1 * (xs[r] - xm)) > 0.5 * a0) ++r;
        half_width = xs[r] - xs[l];
    }
    const double f0 = std::clamp(half_width > 0.0 ? half_width : span_w / 4.0, 1.01 * min_dx, 1.9 * span_w);

    std::vector<Vector> starts;
    for (double c : {center_guess, xs[imax]}) {
        for (double fs : {1.0, 0.5, 2.0}) {
            Vector p(np);
            p << a0, center_inv(c), width.inverse(std::clamp(f0 * fs, 1.01 * min_dx, 1.9 * span_w)), b0, b1;
            if (pv) p[5] = 0.3;
            starts.push_back(p);
        }
    }

    optimize::LmResult best;
    bool have = false;
    for (const auto& s : starts) {
        optimize::LmResult r;
        try {
            r = optimize::levenberg_marquardt(residual, s);
        } catch (const ConvergenceError&) {
            continue;
        }
        if (!std::isfinite(r.ssr)) continue;
        if (!have || detail::better_start(r.ssr, r.params, best.ssr, best.params)) {
            best = std::move(r);
            have = true;
        }
    }
    if (!have) throw ConvergenceError("peak fit: no start converged");

    const Vector se = optimize::standard_errors(best.jacobian, best.ssr);
    const auto& p = best.params;
    PeakFit out;
    out.amplitude = p[0];
    out.amplitude_err = se[0];
    out.center = center_of(p[1]);
    const double s = detail::logistic(p[1]);
    out.center_err = span_w * s * (1.0 - s) * se[1];
    out.fwhm = width.value(p[2]);
    out.fwhm_err = std::abs(width.derivative(p[2])) * se[2];
    out.baseline_offset = p[3];
    out.baseline_slope = p[4];
    if (pv) {
        out.eta = std::pow(std::sin(p[5]), 2);
        out.eta_err = std::abs(std::sin(2.0 * p[5])) * se[5];
    }
    out.rms_residual = std::sqrt(best.ssr / static_cast<double>(n));
    out.detected = out.amplitude > 3.0 * out.rms_residual;
    return out;
}

} // namespace spclab::peakfit
