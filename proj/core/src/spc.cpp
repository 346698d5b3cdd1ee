#include "spclab/spc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "fit_util.hpp"
#include "spclab/ins.hpp"
#include "spclab/optimize.hpp"
#include "spclab/parallel.hpp"
#include "spclab/thermal.hpp"

namespace spclab::spc {

using optimize::Matrix;
using optimize::Vector;

void LambdaProfile::validate() const {
    if (edges_cm.size() < 2) throw ValidationError("lambda profile needs at least two window edges");
    if (lambdas_per_us.size() + 1 != edges_cm.size()) {
        std::ostringstream os;
        os << "lambda profile has " << lambdas_per_us.size() << " coefficients for " << edges_cm.size() << " edges";
        throw ValidationError(os.str());
    }
    if (!(edges_cm.front() >= 0.0)) throw ValidationError("lambda profile first edge must be >= 0");
    for (std::size_t i = 1; i < edges_cm.size(); ++i)
        if (!(edges_cm[i] > edges_cm[i - 1]) || !std::isfinite(edges_cm[i]))
            throw ValidationError("lambda profile edges must be strictly increasing");
    for (double l : lambdas_per_us)
        if (!(l >= 0.0) || !std::isfinite(l)) throw ValidationError("lambda profile coefficients must be >= 0");
    if (excluded_below_cm && (!(*excluded_below_cm >= 0.0) || !std::isfinite(*excluded_below_cm)))
        throw ValidationError("excluded_below_cm must be >= 0");
}

std::pair<double, double> LambdaProfile::window_range(std::size_t w) const {
    const double hi = edges_cm.at(w + 1);
    const double lo = std::min(hi, std::max(edges_cm[w], excluded_below_cm.value_or(0.0)));
    return {lo, hi};
}

std::string_view to_string(SpectrumMode m) { return m == SpectrumMode::interpolate ? "interpolate" : "nearest"; }

SpectrumMode spectrum_mode_from_string(std::string_view s) {
    if (s == "interpolate") return SpectrumMode::interpolate;
    if (s == "nearest" || s == "frozen") return SpectrumMode::nearest;
    throw ValidationError("unknown spectrum mode '" + std::string(s) + "' (expected interpolate|nearest)");
}

std::string_view to_string(CrossoverStatus s) {
    switch (s) {
    case CrossoverStatus::found: return "found";
    case CrossoverStatus::none: return "none";
    case CrossoverStatus::degenerate: return "degenerate";
    }
    return "none";
}

namespace {

// G_T(c_i) R(c_i, T) per bin.
std::vector<double> thermal_row(const SpectrumSet& set, double T, SpectrumMode mode) {
    const Spectrum g =
        mode == SpectrumMode::interpolate ? ins::interpolate_temperature(set, T) : ins::nearest_temperature(set, T);
    std::vector<double> row(g.grid.size());
    for (std::size_t i = 0; i < row.size(); ++i)
        row[i] = g.intensity[i] * thermal::two_phonon_factor(g.grid.centers()[i], T);
    return row;
}

std::vector<double> basis_from_row(const std::vector<double>& row, const EnergyGrid& grid,
                                   const LambdaProfile& profile) {
    std::vector<double> b(profile.windows(), 0.0);
    for (std::size_t w = 0; w < b.size(); ++w) {
        const auto [lo, hi] = profile.window_range(w);
        if (!(hi > lo)) continue;
        for (std::size_t i = 0; i < row.size(); ++i) {
            const double o = grid.overlap(i, lo, hi);
            if (o > 0.0) b[w] += row[i] * o;
        }
    }
    return b;
}

LambdaProfile edges_only(const std::vector<double>& edges, std::optional<double> excluded) {
    LambdaProfile p{edges, std::vector<double>(edges.size() > 0 ? edges.size() - 1 : 0, 0.0), excluded};
    p.validate();
    return p;
}

struct Prepared {
    relax::RateSeries series;
    std::vector<std::vector<double>> rows;
};

Prepared prepare(const relax::RateSeries& series, const SpectrumSet& set, const FitOptions& opt) {
    series.validate();
    Prepared p{series.filtered_min_temperature(opt.t_floor_K), {}};
    if (p.series.points.empty()) {
        std::ostringstream os;
        os << "no rate points at or above the " << opt.t_floor_K << " K floor";
        throw ValidationError(os.str());
    }
    if (opt.mode == SpectrumMode::interpolate) {
        for (const auto& pt : p.series.points) {
            if (pt.temperature_K < set.t_min() || pt.temperature_K > set.t_max()) {
                std::ostringstream os;
                os << "rate point at " << pt.temperature_K << " K lies outside the spectrum range [" << set.t_min()
                   << ", " << set.t_max() << "] K";
                throw ValidationError(os.str());
            }
        }
    }
    p.rows.resize(p.series.points.size());
    for (std::size_t i = 0; i < p.rows.size(); ++i) p.rows[i] = thermal_row(set, p.series.points[i].temperature_K, opt.mode);
    return p;
}

SpcFit fit_prepared(const Prepared& prep, const SpectrumSet& set, const std::vector<double>& edges,
                    const FitOptions& opt, bool with_crossovers) {
    LambdaProfile profile = edges_only(edges, opt.excluded_below_cm);
    const std::size_t n = prep.series.points.size();
    const std::size_t m = profile.windows();
    const std::size_t n_par = m + (opt.include_direct ? 1 : 0);
    if (n < n_par) {
        std::ostringstream os;
        os << "fit_lambda_windows: " << n << " rate points for " << n_par << " parameters";
        throw ValidationError(os.str());
    }

    Eigen::MatrixXd basis(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n_par));
    Eigen::VectorXd rates(static_cast<Eigen::Index>(n));
    std::vector<double> y(n), wt(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto b = basis_from_row(prep.rows[i], set.grid(), profile);
        for (std::size_t w = 0; w < m; ++w) basis(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(w)) = b[w];
        const auto& pt = prep.series.points[i];
        if (opt.include_direct) basis(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m)) = pt.temperature_K;
        rates[static_cast<Eigen::Index>(i)] = pt.rate_per_us;
        y[i] = std::log10(pt.rate_per_us);
        if (opt.weighted && pt.rate_err_per_us && *pt.rate_err_per_us > 0.0)
            wt[i] = pt.rate_per_us * std::log(10.0) / *pt.rate_err_per_us;
    }
    for (std::size_t w = 0; w < m; ++w) {
        if (basis.col(static_cast<Eigen::Index>(w)).maxCoeff() > 0.0) continue;
        const auto [lo, hi] = profile.window_range(w);
        std::ostringstream os;
        os << "window " << (w + 1) << " [" << lo << ", " << hi
           << "] cm^-1 has no spectral weight at any fitted temperature; its coefficient is unidentifiable";
        throw ValidationError(os.str());
    }

    auto model = [&](const Vector& p, Eigen::Index i) {
        double s = 0.0;
        for (Eigen::Index k = 0; k < p.size(); ++k) s += std::exp(p[k]) * basis(i, k);
        return s;
    };
    auto residual = [&](const Vector& p) {
        Vector r(static_cast<Eigen::Index>(n));
        for (Eigen::Index i = 0; i < r.size(); ++i)
            r[i] = wt[static_cast<std::size_t>(i)] *
                   (std::log10(std::max(model(p, i), 1e-300)) - y[static_cast<std::size_t>(i)]);
        return r;
    };
    auto jacobian = [&](const Vector& p) {
        Matrix J(static_cast<Eigen::Index>(n), p.size());
        for (Eigen::Index i = 0; i < J.rows(); ++i) {
            const double s = std::max(model(p, i), 1e-300);
            for (Eigen::Index k = 0; k < p.size(); ++k)
                J(i, k) = wt[static_cast<std::size_t>(i)] * std::exp(p[k]) * basis(i, k) / (s * std::log(10.0));
        }
        return J;
    };

    std::vector<Vector> starts;
    {
        const auto guess = detail::positive_amplitude_guess(basis, rates);
        Vector p(static_cast<Eigen::Index>(n_par));
        for (std::size_t k = 0; k < n_par; ++k) p[static_cast<Eigen::Index>(k)] = std::log(guess[k]);
        starts.push_back(p);
        // Equal share of the mean rate per parameter.
        for (std::size_t k = 0; k < n_par; ++k) {
            const double col = basis.col(static_cast<Eigen::Index>(k)).mean();
            p[static_cast<Eigen::Index>(k)] = std::log(rates.mean() / (static_cast<double>(n_par) * col));
        }
        starts.push_back(p);
    }

    optimize::LmResult best;
    bool have = false;
    for (const auto& s : starts) {
        optimize::LmResult r;
        try {
            r = optimize::levenberg_marquardt(residual, s, {}, jacobian);
        } catch (const ConvergenceError&) {
            continue;
        }
        if (!std::isfinite(r.ssr)) continue;
        if (!have || detail::better_start(r.ssr, r.params, best.ssr, best.params)) {
            best = std::move(r);
            have = true;
        }
    }
    if (!have) throw ConvergenceError("fit_lambda_windows: no start converged");

    const Vector se = optimize::standard_errors(best.jacobian, best.ssr);
    SpcFit fit;
    fit.include_direct = opt.include_direct;
    fit.n_points = n;
    fit.mode = opt.mode;
    fit.representation = set.representation();
    fit.normalization_cutoff_cm = opt.normalization_cutoff_cm;
    fit.t_min_K = prep.series.points.front().temperature_K;
    fit.t_max_K = prep.series.points.back().temperature_K;
    for (std::size_t w = 0; w < m; ++w) {
        const double l = std::exp(best.params[static_cast<Eigen::Index>(w)]);
        profile.lambdas_per_us[w] = l;
        fit.lambda_err_per_us.push_back(l * se[static_cast<Eigen::Index>(w)]);
    }
    if (opt.include_direct) {
        fit.a_dir_per_us_per_K = std::exp(best.params[static_cast<Eigen::Index>(m)]);
        fit.a_dir_err = fit.a_dir_per_us_per_K * se[static_cast<Eigen::Index>(m)];
    }
    double acc = 0.0;
    for (Eigen::Index i = 0; i < best.residuals.size(); ++i) {
        const double u = best.residuals[i] / wt[static_cast<std::size_t>(i)];
        acc += u * u;
    }
    fit.rmse_log = std::sqrt(acc / static_cast<double>(n));
    fit.profile = std::move(profile);
    if (with_crossovers) fit.crossovers = crossover_temperatures(fit, set);
    return fit;
}

} // namespace

std::vector<double> window_basis(const LambdaProfile& profile, const SpectrumSet& set, double T, SpectrumMode mode) {
    profile.validate();
    return basis_from_row(thermal_row(set, T, mode), set.grid(), profile);
}

std::vector<double> window_contributions(const LambdaProfile& profile, const SpectrumSet& set, double T,
                                         SpectrumMode mode) {
    auto b = window_basis(profile, set, T, mode);
    for (std::size_t w = 0; w < b.size(); ++w) b[w] *= profile.lambdas_per_us[w];
    return b;
}

double forward_rate(const LambdaProfile& profile, const SpectrumSet& set, double T, SpectrumMode mode) {
    const auto c = window_contributions(profile, set, T, mode);
    return std::accumulate(c.begin(), c.end(), 0.0);
}

double SpcFit::rate(const SpectrumSet& set, double T) const {
    return forward_rate(profile, set, T, mode) + (include_direct ? a_dir_per_us_per_K * T : 0.0);
}

SpcFit fit_lambda_windows(const relax::RateSeries& series, const SpectrumSet& set, const std::vector<double>& edges,
                          const FitOptions& options) {
    edges_only(edges, options.excluded_below_cm);
    return fit_prepared(prepare(series, set, options), set, edges, options, true);
}

std::vector<double> spectral_density(const LambdaProfile& profile, const SpectrumSet& set, double T,
                                     SpectrumMode mode) {
    profile.validate();
    const auto row = thermal_row(set, T, mode);
    const auto& grid = set.grid();
    std::vector<double> d(row.size(), 0.0);
    for (std::size_t i = 0; i < row.size(); ++i) {
        double lw = 0.0;
        for (std::size_t w = 0; w < profile.windows(); ++w) {
            const auto [lo, hi] = profile.window_range(w);
            if (hi > lo) lw += profile.lambdas_per_us[w] * grid.overlap(i, lo, hi);
        }
        d[i] = row[i] * lw / grid.width(i);
    }
    return d;
}

std::vector<Crossover> crossover_temperatures(const LambdaProfile& profile, const SpectrumSet& set, double t_lo,
                                              double t_hi, SpectrumMode mode) {
    profile.validate();
    if (!(t_lo > 0.0) || !(t_hi > t_lo)) throw ValidationError("crossover search needs 0 < t_lo < t_hi");
    const std::size_t m = profile.windows();
    std::vector<Crossover> out;
    if (m < 2) return out;

    constexpr std::size_t n_scan = 400;
    const auto temps = detail::log_spaced(t_lo, t_hi, n_scan);
    std::vector<std::vector<double>> contrib(n_scan);
    for (std::size_t k = 0; k < n_scan; ++k) contrib[k] = window_contributions(profile, set, temps[k], mode);

    for (std::size_t w = 0; w + 1 < m; ++w) {
        Crossover c{w, CrossoverStatus::none, 0.0};
        if (!(profile.lambdas_per_us[w] > 0.0) || !(profile.lambdas_per_us[w + 1] > 0.0)) {
            out.push_back(c);
            continue;
        }
        double max_diff = 0.0, max_sum = 0.0;
        for (std::size_t k = 0; k < n_scan; ++k) {
            max_diff = std::max(max_diff, std::abs(contrib[k][w] - contrib[k][w + 1]));
            max_sum = std::max(max_sum, contrib[k][w] + contrib[k][w + 1]);
        }
        if (max_diff <= 1e-9 * max_sum) {
            c.status = CrossoverStatus::degenerate;
            out.push_back(c);
            continue;
        }
        auto diff = [&](double T) {
            const auto v = window_contributions(profile, set, T, mode);
            return v[w] - v[w + 1];
        };
        for (std::size_t k = 0; k + 1 < n_scan; ++k) {
            const double d0 = contrib[k][w] - contrib[k][w + 1];
            const double d1 = contrib[k + 1][w] - contrib[k + 1][w + 1];
            if (d0 == 0.0) {
                c = {w, CrossoverStatus::found, temps[k]};
                break;
            }
            if ((d0 < 0.0) == (d1 < 0.0) && d1 != 0.0) continue;
            double a = temps[k], b = temps[k + 1], fa = d0;
            while (b - a > 0.01) {
                const double mid = 0.5 * (a + b);
                const double fm = diff(mid);
                if ((fm < 0.0) == (fa < 0.0) && fm != 0.0) {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                }
            }
            c = {w, CrossoverStatus::found, 0.5 * (a + b)};
            break;
        }
        out.push_back(c);
    }
    return out;
}

std::vector<Crossover> crossover_temperatures(const SpcFit& fit, const SpectrumSet& set) {
    double lo = set.t_min(), hi = set.t_max();
    if (fit.t_max_K > fit.t_min_K) {
        lo = std::max(lo, fit.t_min_K);
        hi = std::min(hi, fit.t_max_K);
    }
    if (fit.mode == SpectrumMode::nearest && fit.t_max_K > fit.t_min_K) {
        lo = fit.t_min_K;
        hi = fit.t_max_K;
    }
    if (!(hi > lo)) {
        std::vector<Crossover> none;
        for (std::size_t w = 0; w + 1 < fit.profile.windows(); ++w) none.push_back({w, CrossoverStatus::none, 0.0});
        return none;
    }
    return crossover_temperatures(fit.profile, set, lo, hi, fit.mode);
}

std::vector<double> default_cutoff_grid() {
    std::vector<double> g;
    for (int c = 25; c <= 575; c += 10) g.push_back(c);
    return g;
}

CutoffScan cutoff_scan(const std::vector<relax::RateSeries>& series, const SpectrumSet& set,
                       const std::vector<double>& grid_in, const CutoffScanOptions& opt) {
    if (series.empty()) throw ValidationError("cutoff_scan: no rate series");
    const std::vector<double> grid = grid_in.empty() ? default_cutoff_grid() : grid_in;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0) || !(grid[i] < opt.e_max_cm)) {
            std::ostringstream os;
            os << "cutoff " << grid[i] << " cm^-1 not strictly inside (0, " << opt.e_max_cm << ")";
            throw ValidationError(os.str());
        }
        if (i > 0 && !(grid[i] > grid[i - 1])) throw ValidationError("cutoff grid must be strictly increasing");
    }
    std::vector<Prepared> prepared;
    for (const auto& s : series) prepared.push_back(prepare(s, set, opt.fit));

    CutoffScan scan;
    auto run = [&](const std::vector<double>& cutoffs) {
        const std::size_t base = scan.cutoffs_cm.size();
        const std::size_t ns = series.size();
        scan.cutoffs_cm.insert(scan.cutoffs_cm.end(), cutoffs.begin(), cutoffs.end());
        scan.rmse_log.resize(scan.cutoffs_cm.size(), std::vector<std::optional<double>>(ns));
        std::vector<std::string> errors(cutoffs.size() * ns);
        parallel_for(cutoffs.size() * ns, [&](std::size_t job) {
            const std::size_t c = job / ns, s = job % ns;
            try {
                const auto fit =
                    fit_prepared(prepared[s], set, {0.0, cutoffs[c], opt.e_max_cm}, opt.fit, false);
                scan.rmse_log[base + c][s] = fit.rmse_log;
            } catch (const Error& e) {
                errors[job] = e.what();
            }
        });
        for (std::size_t job = 0; job < errors.size(); ++job) {
            if (errors[job].empty()) continue;
            std::ostringstream os;
            os << "cutoff " << cutoffs[job / ns] << " cm^-1, series " << (job % ns) << ": " << errors[job];
            scan.failures.push_back(os.str());
        }
        for (std::size_t c = 0; c < cutoffs.size(); ++c) {
            double sum = 0.0;
            bool all = true;
            for (const auto& v : scan.rmse_log[base + c]) {
                if (!v) all = false;
                else sum += *v;
            }
            scan.total_rmse_log.push_back(all ? std::optional<double>(sum) : std::nullopt);
        }
    };
    run(grid);
    scan.coarse_size = grid.size();

    std::size_t ok = 0;
    for (const auto& v : scan.total_rmse_log) ok += v.has_value();
    if (2 * ok < grid.size()) {
        std::ostringstream os;
        os << "cutoff scan: only " << ok << " of " << grid.size() << " cutoffs could be fitted";
        if (!scan.failures.empty()) os << " (first failure: " << scan.failures.front() << ")";
        throw ConvergenceError(os.str());
    }

    auto argmin = [&](std::size_t from, std::size_t to) {
        std::size_t best = to;
        for (std::size_t i = from; i < to; ++i) {
            const auto& v = scan.total_rmse_log[i];
            if (!v) continue;
            if (best == to || *v < *scan.total_rmse_log[best] ||
                (*v == *scan.total_rmse_log[best] && scan.cutoffs_cm[i] < scan.cutoffs_cm[best]))
                best = i;
        }
        return best;
    };
    const std::size_t coarse_best = argmin(0, grid.size());

    // Strict local minima of the coarse curve, gaps skipped.
    std::vector<double> curve;
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (scan.total_rmse_log[i]) curve.push_back(*scan.total_rmse_log[i]);
    std::size_t minima = 0;
    for (std::size_t i = 0; i < curve.size(); ++i) {
        const bool left = i == 0 || curve[i] < curve[i - 1];
        const bool right = i + 1 == curve.size() || curve[i] < curve[i + 1];
        if (left && right) ++minima;
    }
    scan.unique_coarse_minimum = minima == 1;
    const auto [lo_it, hi_it] = std::minmax_element(curve.begin(), curve.end());
    scan.weakly_identified = curve.size() < 2 || (*hi_it - *lo_it) < opt.flat_threshold * *hi_it;

    if (opt.refine_factor > 1 && grid.size() >= 2) {
        const double left = coarse_best > 0 ? grid[coarse_best - 1] : grid[coarse_best];
        const double right = coarse_best + 1 < grid.size() ? grid[coarse_best + 1] : grid[coarse_best];
        const double step = std::min(coarse_best > 0 ? grid[coarse_best] - left : right - grid[coarse_best],
                                     coarse_best + 1 < grid.size() ? right - grid[coarse_best]
                                                                   : grid[coarse_best] - left) /
                            opt.refine_factor;
        std::vector<double> fine;
        for (int k = 1;; ++k) {
            const double c = left + step * k;
            if (c >= right - 1e-9 * step) break;
            if (std::abs(c - grid[coarse_best]) < 1e-9 * step) continue;
            if (std::binary_search(grid.begin(), grid.end(), c)) continue;
            fine.push_back(c);
        }
        if (!fine.empty()) run(fine);
    }
    const std::size_t best = argmin(0, scan.cutoffs_cm.size());
    scan.selected_cutoff_cm = scan.cutoffs_cm[best];
    return scan;
}

std::vector<SweepCell> robustness_sweep(const relax::RateSeries& series, const std::vector<NamedSet>& sets,
                                        const std::vector<double>& cutoffs, const std::vector<double>& edges,
                                        const FitOptions& options) {
    if (sets.empty() || cutoffs.empty()) throw ValidationError("robustness_sweep needs at least one configuration");
    edges_only(edges, options.excluded_below_cm);
    std::vector<SweepCell> cells(sets.size() * cutoffs.size());
    parallel_for(cells.size(), [&](std::size_t job) {
        const auto& named = sets[job / cutoffs.size()];
        const double cut = cutoffs[job % cutoffs.size()];
        SweepCell& cell = cells[job];
        cell.set_name = named.name;
        cell.normalization_cutoff_cm = cut;
        try {
            const SpectrumSet renorm = ins::renormalize(named.set, cut);
            FitOptions o = options;
            o.normalization_cutoff_cm = cut;
            cell.fit = fit_lambda_windows(series, renorm, edges, o);
            const auto& l = cell.fit->profile.lambdas_per_us;
            for (std::size_t w = 0; w + 1 < l.size(); ++w)
                cell.lambda_ratios.push_back(l[w] > 0.0 ? l[w + 1] / l[w] : std::numeric_limits<double>::infinity());
        } catch (const Error& e) {
            cell.error = e.what();
        }
    });
    return cells;
}

} // namespace spclab::spc
