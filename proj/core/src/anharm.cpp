#include "spclab/anharm.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "spclab/parallel.hpp"

namespace spclab::anharm {

std::vector<PhononPeakTrack> fit_phonon_peaks(const SpectrumSet& set, const std::vector<PhononSeed>& seeds,
                                              const PeakFitOptions& opt) {
    if (seeds.empty()) throw ValidationError("fit_phonon_peaks: no seeds");
    for (const auto& s : seeds)
        if (!(s.center_cm > 0.0) || !(s.half_width_cm > 0.0))
            throw ValidationError("fit_phonon_peaks: seed needs center_cm > 0 and half_width_cm > 0");
    if (opt.resolution_fwhm_cm && !(*opt.resolution_fwhm_cm >= 0.0))
        throw ValidationError("resolution_fwhm_cm must be >= 0");
    for (std::size_t a = 0; a < seeds.size(); ++a) {
        for (std::size_t b = a + 1; b < seeds.size(); ++b) {
            const double gap = std::abs(seeds[a].center_cm - seeds[b].center_cm);
            if (gap < seeds[a].half_width_cm + seeds[b].half_width_cm) {
                std::ostringstream os;
                os << "unresolved overlap between peaks at " << seeds[a].center_cm << " and " << seeds[b].center_cm
                   << " cm^-1";
                warn(os.str());
            }
        }
    }

    const auto& centers = set.grid().centers();
    std::vector<PhononPeakTrack> tracks(seeds.size());
    parallel_for(seeds.size(), [&](std::size_t k) {
        const auto& seed = seeds[k];
        auto& t = tracks[k];
        t.label = seed.label;
        t.profile = opt.profile;
        double center = seed.center_cm;
        for (const auto& spec : set.spectra()) {
            PhononPoint pt;
            pt.temperature_K = spec.temperature_K;
            peakfit::PeakFit fit;
            try {
                fit = peakfit::fit_peak(centers, spec.intensity, center - seed.half_width_cm,
                                        center + seed.half_width_cm, opt.profile, center);
            } catch (const ConvergenceError&) {
                fit.detected = false;
            }
            pt.missing = !fit.detected;
            if (!pt.missing) {
                pt.center_cm = fit.center;
                pt.center_err_cm = fit.center_err;
                pt.fwhm_cm = fit.fwhm;
                pt.fwhm_err_cm = fit.fwhm_err;
                if (opt.resolution_fwhm_cm) {
                    const double r = *opt.resolution_fwhm_cm;
                    const double f2 = fit.fwhm * fit.fwhm - r * r;
                    pt.fwhm_cm = f2 > 0.0 ? std::sqrt(f2) : 0.0;
                    pt.fwhm_err_cm = pt.fwhm_cm > 0.0 ? fit.fwhm * fit.fwhm_err / pt.fwhm_cm : fit.fwhm_err;
                }
                pt.amplitude = fit.amplitude;
                pt.eta = fit.eta;
                pt.eta_err = fit.eta_err;
                center = fit.center;
            }
            t.points.push_back(pt);
        }
        const PhononPoint* base = nullptr;
        for (const auto& p : t.points)
            if (!p.missing) {
                base = &p;
                break;
            }
        if (!base) return;
        t.base_temperature_K = base->temperature_K;
        const double c0 = base->center_cm, f0 = base->fwhm_cm;
        for (auto& p : t.points) {
            if (p.missing) continue;
            p.d_center_cm = p.center_cm - c0;
            p.d_fwhm_cm = p.fwhm_cm - f0;
        }
    });
    return tracks;
}

GruneisenResult gruneisen(std::span<const double> dv, std::span<const double> de) {
    if (dv.size() != de.size()) throw ValidationError("gruneisen: dV/V and dE/E length mismatch");
    if (dv.empty()) throw ValidationError("gruneisen: no points");
    double svv = 0.0, sve = 0.0;
    for (std::size_t i = 0; i < dv.size(); ++i) {
        if (!std::isfinite(dv[i]) || !std::isfinite(de[i])) throw ValidationError("gruneisen: non-finite input");
        svv += dv[i] * dv[i];
        sve += dv[i] * de[i];
    }
    if (std::all_of(dv.begin(), dv.end(), [](double v) { return std::abs(v) < 1e-12; }))
        throw ValidationError("no expansion signal: every dV/V is zero");

    GruneisenResult r;
    r.n_points = dv.size();
    r.gamma = -sve / svv;
    double ssr = 0.0;
    for (std::size_t i = 0; i < dv.size(); ++i) {
        const double e = de[i] + r.gamma * dv[i];
        ssr += e * e;
    }
    const auto n = static_cast<double>(dv.size());
    r.origin_residual = std::sqrt(ssr / n);
    r.gamma_err = dv.size() > 1 ? std::sqrt(ssr / (n - 1.0) / svv) : 0.0;

    if (dv.size() > 2) {
        double mv = 0.0, me = 0.0;
        for (std::size_t i = 0; i < dv.size(); ++i) {
            mv += dv[i];
            me += de[i];
        }
        mv /= n;
        me /= n;
        double cvv = 0.0, cve = 0.0;
        for (std::size_t i = 0; i < dv.size(); ++i) {
            cvv += (dv[i] - mv) * (dv[i] - mv);
            cve += (dv[i] - mv) * (de[i] - me);
        }
        const double slope = cvv > 0.0 ? cve / cvv : 0.0;
        double ss = 0.0;
        for (std::size_t i = 0; i < dv.size(); ++i) {
            const double e = de[i] - (me + slope * (dv[i] - mv));
            ss += e * e;
        }
        r.linearity_residual = std::sqrt(ss / n);
    }
    return r;
}

namespace {

std::optional<double> interpolate_volume(const lattice::VolumeTrack& vol, double T) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : vol.points)
        if (p.dv_over_v) pts.emplace_back(p.temperature_K, *p.dv_over_v);
    if (pts.empty() || T < pts.front().first || T > pts.back().first) return std::nullopt;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (pts[i].first == T) return pts[i].second;
        if (i > 0 && pts[i].first > T) {
            const double f = (T - pts[i - 1].first) / (pts[i].first - pts[i - 1].first);
            return (1.0 - f) * pts[i - 1].second + f * pts[i].second;
        }
    }
    return std::nullopt;
}

} // namespace

GruneisenResult gruneisen(const PhononPeakTrack& track, const lattice::VolumeTrack& vol) {
    const PhononPoint* base = nullptr;
    std::optional<double> v_base;
    for (const auto& p : track.points) {
        if (p.missing) continue;
        v_base = interpolate_volume(vol, p.temperature_K);
        if (v_base) {
            base = &p;
            break;
        }
    }
    if (!base) throw ValidationError("gruneisen: peak track and volume track share no temperature");
    std::vector<double> dv, de;
    for (const auto& p : track.points) {
        if (p.missing) continue;
        const auto v = interpolate_volume(vol, p.temperature_K);
        if (!v) continue;
        dv.push_back((1.0 + *v) / (1.0 + *v_base) - 1.0);
        de.push_back((p.center_cm - base->center_cm) / base->center_cm);
    }
    if (dv.size() < 3) {
        std::ostringstream os;
        os << "gruneisen: " << dv.size() << " overlapping temperatures, at least 3 required";
        throw ValidationError(os.str());
    }
    auto r = gruneisen(std::span<const double>(dv), std::span<const double>(de));
    r.mode_energy_cm = base->center_cm;
    r.base_temperature_K = base->temperature_K;
    return r;
}

} // namespace spclab::anharm
