#include "spclab/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <sstream>

#include "spclab/ins.hpp"
#include "spclab/thermal.hpp"

namespace spclab::synth {

void SynthSpec::validate() const {
    if (temperatures_K.empty()) throw ValidationError("synth spec: no temperatures");
    for (double t : temperatures_K)
        if (!(t > 0.0)) throw ValidationError("synth spec: temperatures must be > 0");
    if (grid.size() == 0) throw ValidationError("synth spec: empty grid");
    if (!(noise_rel >= 0.0)) throw ValidationError("synth spec: noise_rel must be >= 0");
    if (!(debye_amplitude >= 0.0)) throw ValidationError("synth spec: debye_amplitude must be >= 0");
    const auto [tlo, thi] = std::minmax_element(temperatures_K.begin(), temperatures_K.end());
    for (std::size_t k = 0; k < peaks.size(); ++k) {
        const auto& p = peaks[k];
        std::ostringstream where;
        where << "synth spec: peaks[" << k << "]";
        if (!(p.weight >= 0.0)) throw ValidationError(where.str() + ".weight must be >= 0");
        if (!(p.fwhm_cm > 0.0)) throw ValidationError(where.str() + ".fwhm_cm must be > 0");
        if (!(p.fwhm_cm + p.broadening_cm_per_K * (*thi - *tlo) > 0.0))
            throw ValidationError(where.str() + " width becomes non-positive within the temperature range");
    }
}

SpectrumSet generate_spectrum_set(const SynthSpec& s) {
    s.validate();
    const double t_ref = *std::min_element(s.temperatures_K.begin(), s.temperatures_K.end());
    std::mt19937_64 rng(s.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> temps = s.temperatures_K;
    std::sort(temps.begin(), temps.end());

    std::vector<Spectrum> out;
    for (double T : temps) {
        std::vector<double> v(s.grid.size(), 0.0);
        for (const auto& p : s.peaks) {
            const double c = p.center_cm + p.softening_cm_per_K * (T - t_ref);
            const double f = p.fwhm_cm + p.broadening_cm_per_K * (T - t_ref);
            const double sig = f / (2.0 * std::sqrt(2.0 * std::log(2.0)));
            auto cdf = [&](double x) { return 0.5 * std::erfc(-(x - c) / (sig * std::sqrt(2.0))); };
            for (std::size_t i = 0; i < v.size(); ++i)
                v[i] += p.weight * (cdf(s.grid.edges()[i + 1]) - cdf(s.grid.edges()[i])) / s.grid.width(i);
        }
        for (std::size_t i = 0; i < v.size(); ++i) {
            const double e = s.grid.centers()[i];
            if (e < s.debye_cutoff_cm) v[i] += s.debye_amplitude * e * e;
        }
        if (s.noise_rel > 0.0) {
            const double scale = s.noise_rel * *std::max_element(v.begin(), v.end());
            for (double& x : v) x = std::max(0.0, x + scale * normal(rng));
        }
        Spectrum spec{s.grid, std::move(v), T, Provenance::corrected};
        out.push_back(ins::normalize(spec, s.normalization_cutoff_cm));
    }
    return SpectrumSet(std::move(out), s.representation);
}

SynthSpec two_band_spec(std::uint64_t seed) {
    SynthSpec s;
    s.peaks = {
        {35.0, 25.0, 0.6, -0.004, 0.01},  {70.0, 40.0, 1.0, -0.006, 0.01},   {120.0, 60.0, 1.0, -0.008, 0.01},
        {230.0, 70.0, 1.2, -0.01, 0.005}, {320.0, 90.0, 1.5, -0.01, 0.005}, {450.0, 120.0, 1.5, -0.01, 0.005},
    };
    s.debye_amplitude = 2e-5;
    s.temperatures_K = {5.0, 10.0, 20.0, 40.0, 70.0, 100.0, 150.0, 200.0, 250.0, 300.0};
    s.grid = EnergyGrid::uniform(0.0, 700.0, 700);
    s.seed = seed;
    return s;
}

SynthSpec comb_spec(std::uint64_t seed) {
    SynthSpec s;
    const double span = 295.0;
    s.peaks = {
        {45.0, 6.0, 0.5, -2.0 / span, 0.0},     {110.0, 6.0, 0.4, -1.0 / span, 0.0},
        {160.0, 6.0, 0.6, -1.5 / span, 0.0},    {256.0, 6.0, 1.0, -5.0 / span, 0.0},
        {300.0, 6.0, 0.5, -2.0 / span, 3.0 / span}, {420.0, 8.0, 0.8, -3.0 / span, 0.0},
    };
    s.debye_amplitude = 1e-4;
    s.temperatures_K = {5.0, 50.0, 100.0, 150.0, 200.0, 250.0, 300.0};
    s.grid = EnergyGrid::uniform(0.0, 700.0, 1400);
    s.seed = seed;
    return s;
}

std::vector<double> log_spaced_temperatures(double lo, double hi, std::size_t n) {
    if (!(lo > 0.0) || !(hi >= lo) || n == 0) throw ValidationError("log_spaced_temperatures: need 0 < lo <= hi, n > 0");
    std::vector<double> t(n);
    if (n == 1) {
        t[0] = lo;
        return t;
    }
    for (std::size_t i = 0; i < n; ++i)
        t[i] = lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(n - 1));
    t.front() = lo;
    t.back() = hi;
    return t;
}

namespace {

relax::RateSeries noisy_series(const std::vector<double>& temps, const std::vector<double>& clean, double noise_rel,
                               std::uint64_t seed, std::string label) {
    if (!(noise_rel >= 0.0)) throw ValidationError("noise_rel must be >= 0");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    relax::RateSeries s{{}, std::move(label)};
    for (std::size_t i = 0; i < temps.size(); ++i) {
        relax::RatePoint p;
        p.temperature_K = temps[i];
        p.rate_per_us = noise_rel > 0.0 ? clean[i] * std::exp(noise_rel * normal(rng)) : clean[i];
        if (noise_rel > 0.0) p.rate_err_per_us = noise_rel * p.rate_per_us;
        s.points.push_back(p);
    }
    s.validate();
    return s;
}

std::vector<double> sorted(std::vector<double> t) {
    std::sort(t.begin(), t.end());
    return t;
}

} // namespace

relax::RateSeries generate_rate_series(const spc::LambdaProfile& profile, const SpectrumSet& set,
                                       const std::vector<double>& temps_in, double noise_rel, std::uint64_t seed,
                                       std::optional<double> a_dir, spc::SpectrumMode mode) {
    const auto temps = sorted(temps_in);
    std::vector<double> clean;
    for (double T : temps) clean.push_back(spc::forward_rate(profile, set, T, mode) + (a_dir ? *a_dir * T : 0.0));
    return noisy_series(temps, clean, noise_rel, seed, "synthetic");
}

relax::RateSeries generate_local_mode_series(double a_dir, const std::vector<LocalModeTruth>& modes,
                                             const std::vector<double>& temps_in, double noise_rel,
                                             std::uint64_t seed) {
    const auto temps = sorted(temps_in);
    std::vector<double> clean;
    for (double T : temps) {
        double r = a_dir * T;
        for (const auto& m : modes) r += m.amplitude_per_us * thermal::two_phonon_factor(m.energy_cm, T);
        clean.push_back(r);
    }
    return noisy_series(temps, clean, noise_rel, seed, "synthetic-local-mode");
}

relax::RateSeries generate_debye_series(double a_dir, double c_raman, double theta, const std::vector<double>& temps_in,
                                        double noise_rel, std::uint64_t seed) {
    const auto temps = sorted(temps_in);
    std::vector<double> clean;
    for (double T : temps)
        clean.push_back(a_dir * T + c_raman * std::pow(T, 9) * relax::transport_integral_8(theta / T));
    return noisy_series(temps, clean, noise_rel, seed, "synthetic-debye");
}

relax::RecoveryTrace generate_recovery_trace(double t1, double beta, relax::TraceKind kind, double noise,
                                             std::uint64_t seed, std::size_t n) {
    if (!(t1 > 0.0)) throw ValidationError("generate_recovery_trace: T1 must be > 0");
    if (!(beta >= relax::beta_min && beta <= relax::beta_max))
        throw ValidationError("generate_recovery_trace: beta must lie in [0.5, 1.5]");
    if (!(noise >= 0.0)) throw ValidationError("generate_recovery_trace: noise must be >= 0");
    if (n < 8) throw ValidationError("generate_recovery_trace: need at least 8 delays");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    relax::RecoveryTrace tr;
    tr.kind = kind;
    tr.delays_us = log_spaced_temperatures(t1 / 50.0, 10.0 * t1, n);
    const double depth = kind == relax::TraceKind::inversion ? 2.0 : 1.0;
    for (double t : tr.delays_us) {
        double v = 1.0 - depth * std::exp(-std::pow(t / t1, beta));
        if (noise > 0.0) v += noise * normal(rng);
        tr.signal.push_back(v);
    }
    return tr;
}

lattice::DiffractionPattern generate_diffraction_pattern(const std::vector<SynthReflection>& reflections,
                                                         double temperature_K, double reference_temperature_K,
                                                         const std::vector<double>& d_grid, double noise_rel,
                                                         std::uint64_t seed) {
    if (d_grid.size() < 2) throw ValidationError("generate_diffraction_pattern: need at least 2 grid points");
    if (!(noise_rel >= 0.0)) throw ValidationError("generate_diffraction_pattern: noise_rel must be >= 0");
    double amax = 0.0;
    for (const auto& r : reflections) {
        if (!(r.d0_A > 0.0) || !(r.fwhm_A > 0.0) || !(r.amplitude >= 0.0))
            throw ValidationError("generate_diffraction_pattern: reflection needs d0 > 0, fwhm > 0, amplitude >= 0");
        amax = std::max(amax, r.amplitude);
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    lattice::DiffractionPattern p;
    p.temperature_K = temperature_K;
    p.d_A = d_grid;
    const double d_mid = 0.5 * (d_grid.front() + d_grid.back());
    for (double d : d_grid) {
        double v = 0.02 * amax * (1.0 + 0.5 * (d - d_mid) / std::max(1e-12, d_grid.back() - d_grid.front()));
        for (const auto& r : reflections) {
            const double c = r.d0_A * (1.0 + r.alpha_per_K * (temperature_K - reference_temperature_K));
            const double s = r.fwhm_A / (2.0 * std::sqrt(2.0 * std::log(2.0)));
            v += r.amplitude * std::exp(-0.5 * std::pow((d - c) / s, 2));
        }
        if (noise_rel > 0.0) v += noise_rel * amax * normal(rng);
        p.intensity.push_back(v);
    }
    p.validate();
    return p;
}

namespace {

// Real-space radial / tangential amplitudes on the four ligands, optional
// out-of-plane motion and ring-carbon motion, turned into a unit
// mass-weighted eigenvector.
modes::Mode planar_mode(const modes::ModeSet& ms, double freq, const std::array<double, 4>& radial,
                        const std::array<double, 4>& tangential, double z, double ring) {
    std::vector<double> u(3 * ms.atoms.size(), 0.0);
    const double dirs[4][2] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    for (int b = 0; b < 4; ++b) {
        const auto a = static_cast<std::size_t>(1 + b);
        u[3 * a] = radial[b] * dirs[b][0] - tangential[b] * dirs[b][1];
        u[3 * a + 1] = radial[b] * dirs[b][1] + tangential[b] * dirs[b][0];
        u[3 * a + 2] = z;
        const auto c = static_cast<std::size_t>(5 + b);
        u[3 * c + 2] = ring * (b % 2 ? -1.0 : 1.0);
    }
    double n2 = 0.0;
    for (std::size_t a = 0; a < ms.atoms.size(); ++a)
        for (int i = 0; i < 3; ++i) {
            u[3 * a + i] *= std::sqrt(ms.atoms[a].mass_amu);
            n2 += u[3 * a + i] * u[3 * a + i];
        }
    for (double& x : u) x /= std::sqrt(n2);
    return {freq, u};
}

} // namespace

modes::ModeSet planar_core_mode_set() {
    modes::ModeSet ms;
    ms.atoms.push_back({"Cu", 63.546, {0, 0, 0}, 0.55});
    const double r = 1.95;
    const modes::Vec3 n_pos[4] = {{r, 0, 0}, {0, r, 0}, {-r, 0, 0}, {0, -r, 0}};
    for (const auto& p : n_pos) ms.atoms.push_back({"N", 14.007, p, 0.5});
    for (const auto& p : n_pos) ms.atoms.push_back({"C", 12.011, {1.5 * p[0], 1.5 * p[1], 0.0}, 0.001});
    const std::array<double, 4> one{1, 1, 1, 1}, none{0, 0, 0, 0};
    ms.modes = {
        planar_mode(ms, 95, none, none, 1.0, 0.3),
        planar_mode(ms, 160, {1, 0, 1, 0}, none, 0.0, 0.6),
        planar_mode(ms, 215, none, one, 0.0, 0.2),
        planar_mode(ms, 268, one, {0.75, 0.75, 0.75, 0.75}, 0.0, 0.0),
        planar_mode(ms, 288, one, {4.0 / 3.0, 4.0 / 3.0, 4.0 / 3.0, 4.0 / 3.0}, 0.0, 0.0),
        planar_mode(ms, 312, {1, -1, 1, -1}, none, 0.0, 0.0),
        planar_mode(ms, 350, one, none, 0.0, 0.0),
        planar_mode(ms, 430, {1, 0, -1, 0}, {0, 1, 0, -1}, 0.0, 0.5),
        planar_mode(ms, 690, none, none, 0.0, 1.0),
    };
    ms.validate();
    return ms;
}

} // namespace spclab::synth
