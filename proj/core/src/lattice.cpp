#include "spclab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "spclab/error.hpp"
#include "spclab/parallel.hpp"
#include "spclab/peakfit.hpp"

namespace spclab::lattice {

void DiffractionPattern::validate() const {
    if (d_A.size() != intensity.size()) throw ValidationError("diffraction pattern: d/intensity length mismatch");
    if (d_A.size() < 2) throw ValidationError("diffraction pattern needs at least two points");
    if (!(temperature_K > 0.0)) throw ValidationError("diffraction pattern temperature_K must be > 0");
    const bool up = d_A[1] > d_A[0];
    for (std::size_t i = 0; i < d_A.size(); ++i) {
        if (!(d_A[i] > 0.0) || !std::isfinite(d_A[i])) throw ValidationError("diffraction pattern: d must be > 0");
        if (!std::isfinite(intensity[i])) throw ValidationError("diffraction pattern: non-finite intensity");
        if (i > 0 && ((d_A[i] > d_A[i - 1]) != up || d_A[i] == d_A[i - 1]))
            throw ValidationError("diffraction pattern: d grid must be strictly monotone");
    }
}

std::vector<PeakTrack> track_peaks(const std::vector<DiffractionPattern>& patterns, const std::vector<PeakSeed>& seeds) {
    if (patterns.empty()) throw ValidationError("track_peaks: no patterns");
    for (const auto& p : patterns) p.validate();
    for (const auto& s : seeds)
        if (!(s.d0_A > 0.0) || !(s.half_width_A > 0.0))
            throw ValidationError("track_peaks: seed needs d0_A > 0 and half_width_A > 0");
    std::vector<const DiffractionPattern*> order;
    for (const auto& p : patterns) order.push_back(&p);
    std::stable_sort(order.begin(), order.end(),
                     [](auto* a, auto* b) { return a->temperature_K < b->temperature_K; });

    std::vector<PeakTrack> tracks(seeds.size());
    parallel_for(seeds.size(), [&](std::size_t k) {
        const auto& seed = seeds[k];
        PeakTrack& t = tracks[k];
        t.label = seed.label;
        double center = seed.d0_A;
        for (const auto* pat : order) {
            PeakPoint pt;
            pt.temperature_K = pat->temperature_K;
            peakfit::PeakFit fit;
            try {
                fit = peakfit::fit_peak(pat->d_A, pat->intensity, center - seed.half_width_A,
                                        center + seed.half_width_A, peakfit::Profile::gaussian, center);
            } catch (const ConvergenceError&) {
                fit.detected = false;
            }
            pt.missing = !fit.detected;
            if (!pt.missing) {
                pt.center_A = fit.center;
                pt.center_err_A = fit.center_err;
                pt.fwhm_A = fit.fwhm;
                pt.fwhm_err_A = fit.fwhm_err;
                pt.amplitude = fit.amplitude;
                center = fit.center;
            }
            t.points.push_back(pt);
        }
    });
    for (const auto& t : tracks) {
        if (std::all_of(t.points.begin(), t.points.end(), [](const PeakPoint& p) { return p.missing; })) {
            std::ostringstream os;
            os << "peak track '" << t.label << "' has no detected points";
            warn(os.str());
        }
    }
    return tracks;
}

double isotropic_volume_change(double dd) { return std::pow(1.0 + dd, 3) - 1.0; }

VolumeTrack volume_expansion(const std::vector<PeakTrack>& tracks, const std::vector<std::optional<double>>& refs) {
    if (tracks.empty()) throw ValidationError("volume_expansion: no tracks");
    if (!refs.empty() && refs.size() != tracks.size())
        throw ValidationError("volume_expansion: one reference per track required");

    VolumeTrack out;
    std::optional<double> common_ref_T;
    bool ref_T_consistent = true;
    for (std::size_t k = 0; k < tracks.size(); ++k) {
        std::optional<double> ref = refs.empty() ? std::nullopt : refs[k];
        bool from_fit = false;
        if (!ref) {
            const PeakPoint* top = nullptr;
            for (const auto& p : tracks[k].points)
                if (!p.missing && (!top || p.temperature_K >= top->temperature_K)) top = &p;
            if (!top) {
                out.reference_from_fit.push_back(true);
                out.reference_d_A.push_back(0.0);
                continue;
            }
            ref = top->center_A;
            from_fit = true;
            if (!common_ref_T) common_ref_T = top->temperature_K;
            else if (*common_ref_T != top->temperature_K) ref_T_consistent = false;
        } else if (!(*ref > 0.0)) {
            throw ValidationError("volume_expansion: reference d must be > 0");
        }
        out.reference_from_fit.push_back(from_fit);
        out.reference_d_A.push_back(*ref);
    }
    if (std::all_of(out.reference_d_A.begin(), out.reference_d_A.end(), [](double d) { return d <= 0.0; }))
        throw ValidationError("volume_expansion: no track has a reference value");
    const bool all_from_fit =
        std::all_of(out.reference_from_fit.begin(), out.reference_from_fit.end(), [](bool b) { return b; });
    if (all_from_fit && ref_T_consistent) out.reference_temperature_K = common_ref_T;

    std::map<double, std::vector<double>> by_T;
    for (std::size_t k = 0; k < tracks.size(); ++k) {
        for (const auto& p : tracks[k].points) {
            auto& v = by_T[p.temperature_K];
            if (p.missing || !(out.reference_d_A[k] > 0.0)) continue;
            v.push_back(isotropic_volume_change(p.center_A / out.reference_d_A[k] - 1.0));
        }
    }
    for (const auto& [T, values] : by_T) {
        VolumePoint vp;
        vp.temperature_K = T;
        vp.n_tracks = values.size();
        if (!values.empty()) {
            double mean = 0.0;
            for (double v : values) mean += v;
            mean /= static_cast<double>(values.size());
            double ss = 0.0;
            for (double v : values) ss += (v - mean) * (v - mean);
            vp.dv_over_v = mean;
            vp.spread = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
        }
        out.points.push_back(vp);
    }
    return out;
}

} // namespace spclab::lattice
