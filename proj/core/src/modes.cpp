#include "spclab/modes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "spclab/ins.hpp"
#include "spclab/thermal.hpp"

namespace spclab::modes {

void ModeSet::validate() const {
    if (atoms.empty()) throw ValidationError("mode set has no atoms");
    for (std::size_t a = 0; a < atoms.size(); ++a) {
        if (!(atoms[a].mass_amu > 0.0)) {
            std::ostringstream os;
            os << "atoms[" << a << "].mass_amu must be > 0";
            throw ValidationError(os.str());
        }
        if (!(atoms[a].sigma_inc_barn >= 0.0)) {
            std::ostringstream os;
            os << "atoms[" << a << "].sigma_inc_barn must be >= 0";
            throw ValidationError(os.str());
        }
    }
    const std::size_t dim = 3 * atoms.size();
    for (std::size_t k = 0; k < modes.size(); ++k) {
        const auto& m = modes[k];
        std::ostringstream where;
        where << "modes[" << k << "]";
        if (!std::isfinite(m.freq_cm)) throw ValidationError(where.str() + ".freq_cm is not finite");
        if (m.freq_cm < 0.0) throw ValidationError(where.str() + ".freq_cm is imaginary (negative); rejected");
        if (k > 0 && m.freq_cm < modes[k - 1].freq_cm)
            throw ValidationError(where.str() + ".freq_cm breaks ascending order");
        if (m.eigvec.size() != dim) {
            std::ostringstream os;
            os << where.str() << ".eigvec has " << m.eigvec.size() << " components, expected " << dim;
            throw ValidationError(os.str());
        }
        double norm2 = 0.0;
        for (double v : m.eigvec) norm2 += v * v;
        if (std::abs(std::sqrt(norm2) - 1.0) > 1e-6) {
            std::ostringstream os;
            os << where.str() << ".eigvec norm " << std::sqrt(norm2) << " differs from 1 by more than 1e-6";
            throw ValidationError(os.str());
        }
    }
}

Vec3 ModeSet::displacement(std::size_t k, std::size_t a) const {
    const auto& e = modes.at(k).eigvec;
    const double s = 1.0 / std::sqrt(atoms.at(a).mass_amu);
    return {e[3 * a] * s, e[3 * a + 1] * s, e[3 * a + 2] * s};
}

std::vector<double> rmsd_per_atom(const ModeSet& ms, double T, double e_max) {
    ms.validate();
    if (!(T >= 0.0)) throw ValidationError("rmsd_per_atom: temperature_K must be >= 0");
    if (!(e_max > 0.0)) throw ValidationError("rmsd_per_atom: e_max_cm must be > 0");
    using namespace constants;
    std::vector<double> var(ms.atoms.size(), 0.0);
    std::size_t skipped = 0;
    for (const auto& m : ms.modes) {
        if (m.freq_cm > e_max) break;
        if (m.freq_cm == 0.0) {
            ++skipped;
            continue;
        }
        const double omega = m.freq_cm * cm_to_rad_per_s;
        const double occ = T > 0.0 ? 2.0 * thermal::bose_occupation(m.freq_cm, T) + 1.0 : 1.0;
        for (std::size_t a = 0; a < ms.atoms.size(); ++a) {
            const double e2 = m.eigvec[3 * a] * m.eigvec[3 * a] + m.eigvec[3 * a + 1] * m.eigvec[3 * a + 1] +
                              m.eigvec[3 * a + 2] * m.eigvec[3 * a + 2];
            // m^2 -> Angstrom^2
            var[a] += hbar_J_s / (2.0 * ms.atoms[a].mass_amu * amu_kg * omega) * e2 * occ * 1e20;
        }
    }
    if (skipped > 0) {
        std::ostringstream os;
        os << skipped << " zero-frequency mode(s) excluded from RMSD (divergent)";
        warn(os.str());
    }
    for (double& v : var) v = std::sqrt(v);
    return var;
}

double mean_over(const std::vector<double>& values, const std::vector<std::size_t>& atoms) {
    if (atoms.empty()) throw ValidationError("atom group is empty");
    double s = 0.0;
    for (std::size_t a : atoms) {
        if (a >= values.size()) {
            std::ostringstream os;
            os << "atom index " << a << " out of range (" << values.size() << " atoms)";
            throw ValidationError(os.str());
        }
        s += values[a];
    }
    return s / static_cast<double>(atoms.size());
}

namespace {

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

} // namespace

void CoreSpec::validate(const ModeSet& ms) const {
    const std::size_t n = ms.atoms.size();
    if (center >= n) throw ValidationError("core center index out of range");
    std::set<std::size_t> seen{center};
    for (std::size_t l : ligands) {
        if (l >= n) throw ValidationError("core ligand index out of range");
        if (!seen.insert(l).second) throw ValidationError("core needs 4 distinct ligands different from the center");
    }
    if (std::abs(norm(normal) - 1.0) > 1e-6) throw ValidationError("core plane normal must be a unit vector");
}

std::vector<std::size_t> CoreSpec::atoms() const { return {center, ligands[0], ligands[1], ligands[2], ligands[3]}; }

std::vector<StretchScore> stretch_character(const ModeSet& ms, const CoreSpec& core) {
    ms.validate();
    core.validate(ms);
    std::array<Vec3, 4> axis{};
    for (std::size_t b = 0; b < 4; ++b) {
        const Vec3 bond = sub(ms.atoms[core.ligands[b]].position_A, ms.atoms[core.center].position_A);
        const double len = norm(bond);
        Vec3 inplane = bond;
        const double h = dot(bond, core.normal);
        for (int i = 0; i < 3; ++i) inplane[i] -= h * core.normal[i];
        const double lp = norm(inplane);
        if (!(len > 1e-8) || !(lp > 1e-8 * std::max(len, 1.0))) {
            std::ostringstream os;
            os << "degenerate bond geometry: bond " << b << " (atoms " << core.center << "-" << core.ligands[b]
               << ") has zero in-plane length";
            throw ValidationError(os.str());
        }
        for (int i = 0; i < 3; ++i) axis[b][i] = inplane[i] / lp;
    }

    std::vector<StretchScore> out;
    for (std::size_t k = 0; k < ms.modes.size(); ++k) {
        const Vec3 uc = ms.displacement(k, core.center);
        double sum = 0.0, rmax = 0.0;
        for (std::size_t b = 0; b < 4; ++b) {
            const Vec3 r = sub(ms.displacement(k, core.ligands[b]), uc);
            sum += dot(r, axis[b]);
            rmax = std::max(rmax, norm(r));
        }
        const double score = rmax > 0.0 ? std::min(1.0, std::abs(sum) / (4.0 * rmax)) : 0.0;
        out.push_back({k, ms.modes[k].freq_cm, score});
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const StretchScore& a, const StretchScore& b) { return a.score > b.score; });
    return out;
}

NeutronDos neutron_weighted_dos(const ModeSet& ms, const EnergyGrid& grid, const DosOptions& opt) {
    ms.validate();
    if (!(opt.broadening_fwhm_cm > 0.0)) throw ValidationError("broadening_fwhm_cm must be > 0");
    const double sigma = opt.broadening_fwhm_cm / (2.0 * std::sqrt(2.0 * std::log(2.0)));
    NeutronDos out;
    std::vector<double> dens(grid.size(), 0.0);
    for (const auto& m : ms.modes) {
        double w = 0.0;
        for (std::size_t a = 0; a < ms.atoms.size(); ++a) {
            const double e2 = m.eigvec[3 * a] * m.eigvec[3 * a] + m.eigvec[3 * a + 1] * m.eigvec[3 * a + 1] +
                              m.eigvec[3 * a + 2] * m.eigvec[3 * a + 2];
            w += ms.atoms[a].sigma_inc_barn * e2 / ms.atoms[a].mass_amu;
        }
        out.mode_weights.push_back(w);
        if (w == 0.0) continue;
        auto cdf = [&](double x) { return 0.5 * std::erfc(-(x - m.freq_cm) / (sigma * std::sqrt(2.0))); };
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double p = cdf(grid.edges()[i + 1]) - cdf(grid.edges()[i]);
            if (p > 0.0) dens[i] += w * p / grid.width(i);
        }
    }
    out.raw = Spectrum{grid, dens, opt.temperature_K, Provenance::dos};
    const double cut = std::min(opt.normalization_cutoff_cm, grid.hi());
    out.normalized = ins::normalize(out.raw, cut);
    out.normalized.provenance = Provenance::dos;
    return out;
}

} // namespace spclab::modes
