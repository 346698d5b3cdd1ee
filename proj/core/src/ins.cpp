#include "spclab/ins.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "spclab/parallel.hpp"
#include "spclab/thermal.hpp"

namespace spclab::ins {

void CorrectionConfig::validate() const {
    if (!allow_elastic_override && (elastic_cutoff_cm < 10.0 || elastic_cutoff_cm > 20.0)) {
        std::ostringstream os;
        os << "correction.elastic_cutoff_cm = " << elastic_cutoff_cm
           << " outside [10, 20]; set allow_elastic_override to use it";
        throw ValidationError(os.str());
    }
    if (!(elastic_cutoff_cm > 0.0)) throw ValidationError("correction.elastic_cutoff_cm must be > 0");
    if (!(normalization_cutoff_cm > elastic_cutoff_cm))
        throw ValidationError("correction.normalization_cutoff_cm must exceed the elastic cutoff");
    if (multiphonon_order < 0) throw ValidationError("correction.multiphonon_order must be >= 0");
    if (!(multiphonon_tolerance > 0.0)) throw ValidationError("correction.multiphonon_tolerance must be > 0");
    if (multiphonon_order >= 2 && !(multiphonon_strength > 0.0))
        throw ValidationError("correction.multiphonon_strength must be > 0");
}

Spectrum subtract_background(const Spectrum& spec, const Spectrum& background) {
    spec.validate();
    const Spectrum bg = background.grid == spec.grid ? background : resample(background, spec.grid);
    Spectrum out = spec;
    for (std::size_t i = 0; i < out.intensity.size(); ++i)
        out.intensity[i] = std::max(0.0, spec.intensity[i] - bg.intensity[i]);
    out.provenance = Provenance::corrected;
    return out;
}

Spectrum correct_population(const Spectrum& spec) {
    spec.validate();
    Spectrum out = spec;
    const auto& c = spec.grid.centers();
    std::size_t skipped = 0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (c[i] <= 0.0) {
            ++skipped;
            continue;
        }
        out.intensity[i] = spec.intensity[i] / (thermal::bose_occupation(c[i], spec.temperature_K) + 1.0);
    }
    if (skipped > 0) {
        std::ostringstream os;
        os << "population correction skipped " << skipped << " bin(s) at E <= 0";
        warn(os.str());
    }
    out.provenance = Provenance::corrected;
    return out;
}

namespace {

// Unit-area self-convolution on a uniform grid. Pair sums are deposited on
// the two neighbouring bin centres by linear weights.
std::vector<double> convolve_unit(const std::vector<double>& a, const std::vector<double>& b, const EnergyGrid& g) {
    const std::size_t n = a.size();
    const double h = g.width(0);
    const double c0 = g.centers().front();
    std::vector<double> mass(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (a[i] == 0.0) continue;
        const double mi = a[i] * h;
        for (std::size_t j = 0; j < n; ++j) {
            if (b[j] == 0.0) continue;
            const double e = g.centers()[i] + g.centers()[j];
            const double u = (e - c0) / h;
            const auto k = static_cast<std::size_t>(std::floor(u));
            if (k >= n) break;
            const double frac = u - static_cast<double>(k);
            const double m = mi * b[j] * h;
            mass[k] += (1.0 - frac) * m;
            if (k + 1 < n) mass[k + 1] += frac * m;
        }
    }
    double total = 0.0;
    for (double m : mass) total += m;
    std::vector<double> out(n, 0.0);
    if (total > 0.0)
        for (std::size_t i = 0; i < n; ++i) out[i] = mass[i] / (total * h);
    return out;
}

std::vector<double> unit_shape(const std::vector<double>& d, const EnergyGrid& g) {
    const double area = integrate(d, g);
    std::vector<double> p(d.size(), 0.0);
    if (area > 0.0)
        for (std::size_t i = 0; i < d.size(); ++i) p[i] = d[i] / area;
    return p;
}

double order_weight(int k, double w) {
    double v = 1.0;
    for (int i = 1; i <= k; ++i) v *= w / static_cast<double>(i);
    return v;
}

// Uniform working grid for a possibly non-uniform input.
EnergyGrid working_grid(const EnergyGrid& g) {
    if (g.is_uniform()) return g;
    double h = g.width(0);
    for (std::size_t i = 1; i < g.size(); ++i) h = std::min(h, g.width(i));
    const auto n = static_cast<std::size_t>(std::ceil((g.hi() - g.lo()) / h - 1e-9));
    return EnergyGrid::uniform(g.lo(), g.lo() + h * static_cast<double>(n), n);
}

} // namespace

Spectrum multiphonon_expansion(const Spectrum& one_phonon, int order, double strength) {
    one_phonon.validate();
    if (order < 1) throw ValidationError("multiphonon expansion order must be >= 1");
    const EnergyGrid wg = working_grid(one_phonon.grid);
    const Spectrum base = resample(one_phonon, wg);
    const double area = integrate(base.intensity, wg);
    const double norm = area / order_weight(1, strength);

    const auto p1 = unit_shape(base.intensity, wg);
    std::vector<double> pk = p1;
    std::vector<double> total(p1.size(), 0.0);
    for (int k = 1; k <= order; ++k) {
        if (k > 1) pk = convolve_unit(pk, p1, wg);
        const double c = norm * order_weight(k, strength);
        for (std::size_t i = 0; i < total.size(); ++i) total[i] += c * pk[i];
    }
    Spectrum out{wg, std::move(total), one_phonon.temperature_K, one_phonon.provenance};
    return wg == one_phonon.grid ? out : resample(out, one_phonon.grid);
}

Spectrum correct_multiphonon(const Spectrum& spec, const CorrectionConfig& cfg) {
    spec.validate();
    if (cfg.multiphonon_order <= 1) return spec;

    const EnergyGrid wg = working_grid(spec.grid);
    const Spectrum s = resample(spec, wg);
    const double total = integrate(s.intensity, wg);
    if (!(total > 0.0)) return spec;

    double sum_w = 0.0;
    for (int k = 1; k <= cfg.multiphonon_order; ++k) sum_w += order_weight(k, cfg.multiphonon_strength);
    const double norm = total / sum_w;

    std::vector<double> g1 = s.intensity;
    constexpr int max_iterations = 100;
    for (int it = 0; it < max_iterations; ++it) {
        const auto p1 = unit_shape(g1, wg);
        std::vector<double> multi(g1.size(), 0.0);
        std::vector<double> pk = p1;
        for (int k = 2; k <= cfg.multiphonon_order; ++k) {
            pk = convolve_unit(pk, p1, wg);
            const double c = norm * order_weight(k, cfg.multiphonon_strength);
            for (std::size_t i = 0; i < multi.size(); ++i) multi[i] += c * pk[i];
        }
        std::vector<double> next(g1.size());
        double diff = 0.0;
        double ref = 0.0;
        for (std::size_t i = 0; i < g1.size(); ++i) {
            next[i] = std::max(0.0, s.intensity[i] - multi[i]);
            diff += std::abs(next[i] - g1[i]) * wg.width(i);
            ref += std::abs(g1[i]) * wg.width(i);
        }
        g1 = std::move(next);
        const double area = integrate(g1, wg);
        if (!(area > 0.0)) throw ConvergenceError("multiphonon correction removed all intensity");
        if (diff <= cfg.multiphonon_tolerance * ref) {
            for (double& v : g1) v *= total / area;
            Spectrum out{wg, std::move(g1), spec.temperature_K, Provenance::corrected};
            return wg == spec.grid ? out : resample(out, spec.grid);
        }
    }
    Spectrum last{wg, g1, spec.temperature_K, Provenance::corrected};
    throw MultiphononNotConverged("multiphonon correction did not converge in 100 iterations",
                                  wg == spec.grid ? last : resample(last, spec.grid));
}

Spectrum remove_elastic_line(const Spectrum& spec, const CorrectionConfig& cfg) {
    spec.validate();
    const auto& c = spec.grid.centers();
    const double cut = cfg.elastic_cutoff_cm;
    const auto it = std::lower_bound(c.begin(), c.end(), cut);
    if (cut <= spec.grid.lo() || it == c.end() || it == c.begin()) {
        std::ostringstream os;
        os << "elastic cutoff " << cut << " cm^-1 outside grid [" << spec.grid.lo() << ", " << spec.grid.hi() << "]";
        throw ValidationError(os.str());
    }
    const auto j = static_cast<std::size_t>(it - c.begin());
    const double amplitude = std::max(0.0, spec.intensity[j]) / (c[j] * c[j]);
    Spectrum out = spec;
    for (std::size_t i = 0; i < j; ++i) out.intensity[i] = amplitude * c[i] * c[i];
    out.provenance = Provenance::corrected;
    return out;
}

Spectrum normalize(const Spectrum& spec, double cutoff) {
    spec.validate();
    if (!(cutoff > spec.grid.lo()) || cutoff > spec.grid.hi() * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "normalization cutoff " << cutoff << " cm^-1 outside grid [" << spec.grid.lo() << ", "
           << spec.grid.hi() << "]";
        throw ValidationError(os.str());
    }
    const double area = integrate_range(spec.intensity, spec.grid, 0.0, cutoff);
    if (!(area > 0.0) || !std::isfinite(area)) throw ValidationError("cannot normalize: zero integral below cutoff");
    Spectrum out = spec;
    out.provenance = Provenance::normalized;
    if (std::abs(area - 1.0) < 1e-14) return out;
    for (double& v : out.intensity) v /= area;
    return out;
}

Spectrum normalize(const Spectrum& spec, const CorrectionConfig& cfg) {
    return normalize(spec, cfg.normalization_cutoff_cm);
}

Spectrum correct(const Spectrum& raw, const CorrectionConfig& cfg) {
    cfg.validate();
    raw.validate();
    Spectrum s = raw;
    if (cfg.background) {
        s = subtract_background(s, *cfg.background);
    } else {
        for (double& v : s.intensity) v = std::max(0.0, v);
    }
    s = correct_population(s);
    s = correct_multiphonon(s, cfg);
    s = remove_elastic_line(s, cfg);
    return normalize(s, cfg);
}

SpectrumSet correct(const SpectrumSet& raw, const CorrectionConfig& cfg) {
    cfg.validate();
    std::vector<Spectrum> out(raw.size());
    parallel_for(raw.size(), [&](std::size_t i) { out[i] = correct(raw.spectra()[i], cfg); });
    return SpectrumSet(std::move(out), raw.representation());
}

SpectrumSet renormalize(const SpectrumSet& set, double cutoff) {
    std::vector<Spectrum> out;
    out.reserve(set.size());
    for (const auto& s : set.spectra()) out.push_back(normalize(s, cutoff));
    return SpectrumSet(std::move(out), set.representation());
}

Spectrum interpolate_temperature(const SpectrumSet& set, double T) {
    if (set.empty()) throw ValidationError("spectrum set is empty");
    if (!(T >= set.t_min()) || !(T <= set.t_max())) {
        std::ostringstream os;
        os << "extrapolation refused: T = " << T << " K outside measured range [" << set.t_min() << ", "
           << set.t_max() << "] K";
        throw ValidationError(os.str());
    }
    const auto& sp = set.spectra();
    const auto it = std::lower_bound(sp.begin(), sp.end(), T,
                                     [](const Spectrum& s, double t) { return s.temperature_K < t; });
    if (it->temperature_K == T) return *it;
    const Spectrum& hi = *it;
    const Spectrum& lo = *(it - 1);
    const double f = (T - lo.temperature_K) / (hi.temperature_K - lo.temperature_K);
    Spectrum out = lo;
    out.temperature_K = T;
    for (std::size_t i = 0; i < out.intensity.size(); ++i)
        out.intensity[i] = (1.0 - f) * lo.intensity[i] + f * hi.intensity[i];
    return out;
}

Spectrum nearest_temperature(const SpectrumSet& set, double T) {
    if (set.empty()) throw ValidationError("spectrum set is empty");
    const Spectrum* best = &set.spectra().front();
    for (const auto& s : set.spectra())
        if (std::abs(s.temperature_K - T) < std::abs(best->temperature_K - T)) best = &s;
    Spectrum out = *best;
    out.temperature_K = T;
    return out;
}

} // namespace spclab::ins
