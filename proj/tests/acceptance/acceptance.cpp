// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
// Expected values come from closed forms or from oracles written here
// independently of the library (own quadrature, own noise, own sampler).

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "spclab/anharm.hpp"
#include "spclab/ins.hpp"
#include "spclab/lattice.hpp"
#include "spclab/modes.hpp"
#include "spclab/relax.hpp"
#include "spclab/spc.hpp"
#include "spclab/synth.hpp"
#include "spclab/thermal.hpp"
#include "support/fixtures.hpp"

using namespace spclab;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v, int prec = 6) {
    std::ostringstream os;
    os.precision(prec);
    os << v;
    return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Oracles ------------------------------------------------------------------

// k_B / (h c) in cm^-1 per K from the SI defining constants.
constexpr long double kB_over_hc = 1.380649e-23L / (6.62607015e-34L * 2.99792458e10L);

long double x_of(double E, double T) { return static_cast<long double>(E) / (kB_over_hc * T); }

long double factor_oracle(double E, double T) {
    const long double x = x_of(E, T);
    const long double em1 = std::expm1(x);
    return (em1 + 1.0L) / (em1 * em1);
}

// Per-bin linear interpolation in T between the bracketing spectra.
std::vector<double> g_at(const SpectrumSet& set, double T) {
    const auto& s = set.spectra();
    if (T <= s.front().temperature_K) return s.front().intensity;
    if (T >= s.back().temperature_K) return s.back().intensity;
    std::size_t k = 1;
    while (s[k].temperature_K < T) ++k;
    const double t0 = s[k - 1].temperature_K, t1 = s[k].temperature_K;
    const double w = (T - t0) / (t1 - t0);
    std::vector<double> g(s[k].intensity.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = (1.0 - w) * s[k - 1].intensity[i] + w * s[k].intensity[i];
    return g;
}

// sum over bins of density * width * R(centre, T) for bins inside [lo, hi].
// Only valid when lo and hi fall on bin edges, which the callers ensure.
double window_oracle(const SpectrumSet& set, double T, double lo, double hi) {
    const auto g = g_at(set, T);
    const auto& grid = set.grid();
    long double acc = 0.0L;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double c = grid.centers()[i];
        if (c < lo || c > hi || c <= 0.0) continue;
        acc += static_cast<long double>(g[i]) * grid.width(i) * factor_oracle(c, T);
    }
    return static_cast<double>(acc);
}

double rate_oracle(const SpectrumSet& set, const std::vector<double>& edges, const std::vector<double>& lambdas,
                   double T) {
    double r = 0.0;
    for (std::size_t w = 0; w < lambdas.size(); ++w) r += lambdas[w] * window_oracle(set, T, edges[w], edges[w + 1]);
    return r;
}

relax::RateSeries series_of(const std::vector<double>& T, const std::function<double(double)>& f) {
    relax::RateSeries s;
    s.label = "oracle";
    for (double t : T) {
        relax::RatePoint p;
        p.temperature_K = t;
        p.rate_per_us = f(t);
        s.points.push_back(p);
    }
    return s;
}

relax::RateSeries lognormal(relax::RateSeries s, double sigma, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    for (auto& p : s.points) p.rate_per_us *= std::exp(sigma * z(rng));
    return s;
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(n - 1));
    t.front() = lo;
    t.back() = hi;
    return t;
}

const SpectrumSet& two_band() {
    static const SpectrumSet set = synth::generate_spectrum_set(synth::two_band_spec(0));
    return set;
}

const std::vector<double> table_edges{0.0, 185.0, 600.0};
const std::vector<double> table_lambdas{0.068, 127.0};

// Criteria -----------------------------------------------------------------

Outcome c1_two_phonon_limits() {
    const auto t0 = std::chrono::steady_clock::now();
    const double hi = thermal::two_phonon_factor(200.0, 3000.0);
    const double x = static_cast<double>(x_of(200.0, 3000.0));
    const double hi_scaled = hi * x * x;
    const double lo = thermal::two_phonon_factor(42.5, 20.0);
    const double lo_oracle = static_cast<double>(factor_oracle(42.5, 20.0));
    const double n = thermal::bose_occupation(42.5, 20.0);
    const double dt = seconds_since(t0);
    const bool pass = std::abs(hi_scaled - 1.0) <= 1e-3 && std::abs(lo - 0.05176) <= 1e-4 &&
                      std::abs(lo - lo_oracle) <= 1e-12 && std::abs(lo - n * (n + 1.0)) <= 1e-14 && dt < 1.0;
    return {pass, "factor*x^2(200 cm-1, 3000 K) = " + fmt(hi_scaled, 8) + ", factor(42.5 cm-1, 20 K) = " + fmt(lo, 7) +
                      " (closed form " + fmt(lo_oracle, 7) + "), " + fmt(dt * 1e3, 3) + " ms"};
}

Outcome c2_delta_reduction() {
    // Bin [99.5, 100.5] carries unit mass.
    const auto grid = EnergyGrid::uniform(0.5, 600.5, 600);
    Spectrum s{grid, std::vector<double>(grid.size(), 0.0), 100.0, Provenance::normalized};
    std::size_t k = 0;
    while (grid.centers()[k] < 100.0) ++k;
    s.intensity[k] = 1.0 / grid.width(k);
    const SpectrumSet set({s});
    const spc::LambdaProfile p{{0.0, 600.0}, {1.0}, {}};
    const double rate = spc::forward_rate(p, set, 100.0);
    const double oracle = static_cast<double>(factor_oracle(100.0, 100.0));
    const bool pass = std::abs(rate - 0.4077) <= 1e-3 && std::abs(rate - oracle) <= 1e-9;
    return {pass, "forward_rate = " + fmt(rate, 7) + " us^-1, closed form " + fmt(oracle, 7)};
}

Outcome c3_lambda_round_trip() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto& set = two_band();
    const auto T = log_grid(10.0, 300.0, 20);
    const auto clean = series_of(T, [&](double t) { return rate_oracle(set, table_edges, table_lambdas, t); });
    // Dual route: the library forward model agrees with the oracle quadrature.
    double route = 0.0;
    const spc::LambdaProfile truth{table_edges, table_lambdas, {}};
    for (const auto& p : clean.points)
        route = std::max(route, std::abs(spc::forward_rate(truth, set, p.temperature_K) / p.rate_per_us - 1.0));

    const auto fit = spc::fit_lambda_windows(clean, set, table_edges);
    double exact = 0.0;
    for (std::size_t w = 0; w < 2; ++w)
        exact = std::max(exact, std::abs(fit.profile.lambdas_per_us[w] / table_lambdas[w] - 1.0));

    std::vector<double> err_lo, err_hi;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto f = spc::fit_lambda_windows(lognormal(clean, 0.05, 1000 + seed), set, table_edges);
        err_lo.push_back(std::abs(f.profile.lambdas_per_us[0] / table_lambdas[0] - 1.0));
        err_hi.push_back(std::abs(f.profile.lambdas_per_us[1] / table_lambdas[1] - 1.0));
    }
    const double m_lo = median(err_lo), m_hi = median(err_hi);
    const double dt = seconds_since(t0);
    const bool pass = route <= 1e-9 && exact <= 1e-3 && m_lo <= 0.15 && m_hi <= 0.15 && dt < 30.0;
    return {pass, "noiseless max rel err " + fmt(exact, 3) + "; 5% noise median rel err " + fmt(m_lo, 3) + " / " +
                      fmt(m_hi, 3) + " over 50 seeds; oracle vs forward_rate " + fmt(route, 2) + "; " + fmt(dt, 3) +
                      " s"};
}

Outcome c4_cutoff_scan() {
    const auto& set = two_band();
    const auto T = log_grid(10.0, 300.0, 20);
    const auto s = series_of(T, [&](double t) { return rate_oracle(set, table_edges, table_lambdas, t); });
    const auto scan = spc::cutoff_scan({s}, set, spc::default_cutoff_grid());
    // The coarse grid has one strict minimum.
    std::size_t n_min = 0;
    for (std::size_t c = 0; c < scan.coarse_size; ++c) {
        const auto& v = scan.total_rmse_log[c];
        if (!v) continue;
        const bool left = c == 0 || !scan.total_rmse_log[c - 1] || *v < *scan.total_rmse_log[c - 1];
        const bool right = c + 1 >= scan.coarse_size || !scan.total_rmse_log[c + 1] || *v < *scan.total_rmse_log[c + 1];
        n_min += left && right;
    }
    const bool pass = std::abs(scan.selected_cutoff_cm - 185.0) <= 2.0 && scan.unique_coarse_minimum && n_min == 1;
    return {pass, "selected " + fmt(scan.selected_cutoff_cm) + " cm^-1, coarse local minima " + std::to_string(n_min) +
                      ", unique flag " + (scan.unique_coarse_minimum ? "true" : "false")};
}

Outcome c5_local_modes() {
    const auto T = log_grid(5.0, 300.0, 30);
    const double a = 1e-3, c1 = 2.0, c2 = 400.0, e1 = 42.5, e2 = 264.8;
    const auto clean = series_of(T, [&](double t) {
        return a * t + c1 * static_cast<double>(factor_oracle(e1, t)) + c2 * static_cast<double>(factor_oracle(e2, t));
    });
    const auto f = relax::fit_local_modes(clean);
    if (f.modes.size() != 2) return {false, "fit returned " + std::to_string(f.modes.size()) + " modes"};
    const double n1 = std::abs(f.modes[0].energy_cm / e1 - 1.0), n2 = std::abs(f.modes[1].energy_cm / e2 - 1.0);

    std::vector<double> r1, r2;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto g = relax::fit_local_modes(lognormal(clean, 0.05, 2000 + seed));
        if (g.modes.size() != 2) return {false, "noisy fit returned " + std::to_string(g.modes.size()) + " modes"};
        r1.push_back(std::abs(g.modes[0].energy_cm / e1 - 1.0));
        r2.push_back(std::abs(g.modes[1].energy_cm / e2 - 1.0));
    }
    const double m1 = median(r1), m2 = median(r2);
    const bool pass = n1 <= 0.02 && n2 <= 0.02 && m1 <= 0.13 && m2 <= 0.054;
    return {pass, "noiseless E = " + fmt(f.modes[0].energy_cm, 5) + ", " + fmt(f.modes[1].energy_cm, 5) +
                      " cm^-1; 5% noise median rel err " + fmt(m1, 3) + " / " + fmt(m2, 3) + " over 50 seeds"};
}

Outcome c6_log_slopes() {
    const auto T = log_grid(10.0, 300.0, 25);
    double dev1 = 0.0, dev2 = 0.0;
    for (const auto& p : relax::log_slope(series_of(T, [](double t) { return 3e-4 * t; })))
        dev1 = std::max(dev1, std::abs(p.slope - 1.0));
    for (const auto& p : relax::log_slope(series_of(T, [](double t) { return 2e-6 * t * t; })))
        dev2 = std::max(dev2, std::abs(p.slope - 2.0));
    std::vector<double> near;
    for (int k = -10; k <= 10; ++k) near.push_back(20.0 * (1.0 + 0.01 * k));
    const auto sl = relax::log_slope(series_of(near, [](double t) { return thermal::two_phonon_factor(42.5, t); }));
    double at20 = 0.0;
    for (const auto& p : sl)
        if (p.temperature_K == 20.0) at20 = p.slope;
    const long double x = x_of(42.5, 20.0);
    const double oracle = static_cast<double>(x / std::tanh(x / 2.0L));
    const bool pass = dev1 <= 0.02 && dev2 <= 0.02 && std::abs(at20 - 3.36) <= 0.05 && std::abs(at20 - oracle) <= 0.01;
    return {pass, "max |slope-1| " + fmt(dev1, 3) + ", max |slope-2| " + fmt(dev2, 3) + ", local mode " + fmt(at20, 5) +
                      " (x coth(x/2) = " + fmt(oracle, 5) + ")"};
}

Outcome c7_spectral_density() {
    const auto& set = two_band();
    const auto& grid = set.grid();
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int draw = 0; draw < 10; ++draw) {
        const int nw = 1 + static_cast<int>(u(rng) * 3.0);
        std::vector<double> inner;
        for (int i = 0; i < nw - 1; ++i) inner.push_back(10.0 + 580.0 * u(rng));
        std::sort(inner.begin(), inner.end());
        spc::LambdaProfile p;
        p.edges_cm = {0.0};
        p.edges_cm.insert(p.edges_cm.end(), inner.begin(), inner.end());
        p.edges_cm.push_back(300.0 + 300.0 * u(rng));
        for (int w = 0; w < nw; ++w) p.lambdas_per_us.push_back(std::pow(10.0, -2.0 + 4.0 * u(rng)));
        const double T = 5.0 + 295.0 * u(rng);
        const auto d = spc::spectral_density(p, set, T);
        const double r = spc::forward_rate(p, set, T);
        worst = std::max(worst, std::abs(integrate(d, grid) - r) / r);
    }
    const spc::LambdaProfile table{table_edges, table_lambdas, {}};
    const auto d5 = spc::spectral_density(table, set, 5.0);
    const double share = integrate_range(d5, grid, 185.0, grid.hi()) / integrate(d5, grid);
    const bool pass = worst <= 1e-10 && share < 1e-6;
    return {pass, "max rel |integral - forward_rate| " + fmt(worst, 3) + " over 10 draws; share above 185 cm^-1 at 5 K " +
                      fmt(share, 3)};
}

Outcome c8_crossover() {
    const auto& set = two_band();
    // Choose lambda_high so the two windows contribute equally at 42 K, using the
    // oracle quadrature for both window integrals.
    const double b_lo = window_oracle(set, 42.0, 0.0, 185.0), b_hi = window_oracle(set, 42.0, 185.0, 600.0);
    const spc::LambdaProfile p{table_edges, {0.068, 0.068 * b_lo / b_hi}, {}};
    const auto c = spc::crossover_temperatures(p, set, 10.0, 300.0);
    if (c.size() != 1 || c[0].status != spc::CrossoverStatus::found) return {false, "no crossover found"};
    return {std::abs(c[0].temperature_K - 42.0) <= 0.5, "crossover at " + fmt(c[0].temperature_K, 6) + " K"};
}

Outcome c9_gruneisen() {
    const double dv = 0.01, de = -0.04;
    const auto exact = anharm::gruneisen(std::span<const double>(&dv, 1), std::span<const double>(&de, 1));
    std::vector<double> gammas;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        std::mt19937_64 rng(3000 + seed);
        std::normal_distribution<double> z(0.0, 1.0);
        std::vector<double> v, e;
        for (int i = 1; i <= 15; ++i) {
            v.push_back(0.001 * i);
            e.push_back(-2.0 * v.back() * (1.0 + 0.01 * z(rng)));
        }
        gammas.push_back(anharm::gruneisen(v, e).gamma);
    }
    const auto [lo, hi] = std::minmax_element(gammas.begin(), gammas.end());
    const bool pass = std::abs(exact.gamma - 4.0) <= 0.01 && *lo >= 1.9 && *hi <= 2.1;
    return {pass, "exact point gamma " + fmt(exact.gamma, 8) + "; 1% noise gamma in [" + fmt(*lo, 5) + ", " +
                      fmt(*hi, 5) + "] over 20 seeds"};
}

Outcome c10_volume() {
    const double dv = lattice::isotropic_volume_change(0.005);
    const double oracle = 1.005 * 1.005 * 1.005 - 1.0;
    lattice::PeakTrack t;
    lattice::PeakPoint pt;
    pt.temperature_K = 300.0;
    pt.center_A = 3.34 * 1.005;
    t.points.push_back(pt);
    const auto vt = lattice::volume_expansion({t}, {3.34});
    double worst_ratio = 0.0;
    bool shrinking = true;
    double prev = 1e300;
    for (double dd : {1e-3, 1e-4, 1e-5, 1e-6}) {
        const double gap = std::abs(lattice::isotropic_volume_change(dd) / (3.0 * dd) - 1.0);
        worst_ratio = std::max(worst_ratio, gap / dd);
        shrinking = shrinking && gap < prev;
        prev = gap;
    }
    const bool pass = std::abs(dv - 0.015075) <= 1e-6 && std::abs(dv - oracle) <= 1e-15 &&
                      std::abs(*vt.points[0].dv_over_v - oracle) <= 1e-12 && shrinking && worst_ratio <= 1.01;
    return {pass, "dV/V(0.005) = " + fmt(dv, 9) + "; |dV/(3 dd) - 1| / dd <= " + fmt(worst_ratio, 5) +
                      " and shrinking with dd"};
}

Outcome c11_rmsd() {
    constexpr long double hbar = 1.054571817e-34L, amu = 1.66053906660e-27L, c_cm = 2.99792458e10L,
                          kB = 1.380649e-23L, pi = 3.14159265358979323846L;
    auto variance = [&](double mass, double freq, double T) {
        const long double w = 2.0L * pi * c_cm * freq;
        const long double zp = hbar / (2.0L * mass * amu * w) * 1e20L;
        return static_cast<double>(T == 0.0 ? zp : zp / std::tanh(hbar * w / (2.0L * kB * T)));
    };
    modes::ModeSet one;
    one.atoms = {{"X", 1.0, {0, 0, 0}, 1.0}};
    one.modes = {{100.0, {1.0, 0.0, 0.0}}};
    const double single = modes::rmsd_per_atom(one, 0.0, 600.0)[0];
    const double single_oracle = std::sqrt(variance(1.0, 100.0, 0.0));
    const bool part_a = std::abs(single - 0.1298) <= 2e-4;

    const auto ms = synth::planar_core_mode_set();
    const double T = 150.0;
    const auto lib = modes::rmsd_per_atom(ms, T, 1e9);
    std::vector<double> sd;
    for (const auto& m : ms.modes) sd.push_back(std::sqrt(variance(1.0, m.freq_cm, T)));
    std::mt19937_64 rng(11);
    std::normal_distribution<double> z(0.0, 1.0);
    const std::size_t n = 100000, na = ms.atoms.size();
    std::vector<double> acc(na, 0.0), u(3 * na);
    for (std::size_t s = 0; s < n; ++s) {
        std::fill(u.begin(), u.end(), 0.0);
        for (std::size_t k = 0; k < ms.modes.size(); ++k) {
            const double q = sd[k] * z(rng);
            for (std::size_t i = 0; i < u.size(); ++i) u[i] += q * ms.modes[k].eigvec[i];
        }
        for (std::size_t a = 0; a < na; ++a)
            acc[a] += (u[3 * a] * u[3 * a] + u[3 * a + 1] * u[3 * a + 1] + u[3 * a + 2] * u[3 * a + 2]) /
                      ms.atoms[a].mass_amu;
    }
    double mc_mean = 0.0, lib_mean = 0.0;
    for (std::size_t a = 0; a < na; ++a) {
        mc_mean += std::sqrt(acc[a] / n) / na;
        lib_mean += lib[a] / na;
    }
    const double rel = std::abs(lib_mean / mc_mean - 1.0);
    const bool part_b = rel <= 0.01;
    return {part_a && part_b, std::string("single mode ") + (part_a ? "ok" : "MISMATCH") + ": " + fmt(single, 6) +
                                  " A vs target 0.1298 A (hbar/(2 m omega) evaluates to " + fmt(single_oracle, 6) +
                                  " A); Monte Carlo " + (part_b ? "ok" : "MISMATCH") + ": mean rmsd " +
                                  fmt(lib_mean, 6) + " vs " + fmt(mc_mean, 6) + " A (rel " + fmt(rel, 3) + ")"};
}

Outcome c12_stretch() {
    auto ms = fixtures::square_planar_atoms();
    ms.modes = {fixtures::core_mode(ms, 100, {1, 1, 1, 1}, {0, 0, 0, 0}),
                fixtures::core_mode(ms, 200, {1, -1, 1, -1}, {0, 0, 0, 0})};
    const modes::CoreSpec core{0, {1, 2, 3, 4}};
    const auto s = modes::stretch_character(ms, core);
    double breathing = -1.0, anti = -1.0;
    for (const auto& x : s) (x.mode_index == 0 ? breathing : anti) = x.score;
    auto top3 = [&](const modes::ModeSet& set) {
        const auto r = modes::stretch_character(set, core);
        return r.size() >= 4 && r[0].freq_cm == 350.0 && r[1].freq_cm == 268.0 && r[2].freq_cm == 288.0 &&
               r[3].score < r[2].score;
    };
    const bool a = top3(fixtures::porphyrin_like_modes()), b = top3(synth::planar_core_mode_set());
    const bool pass = std::abs(breathing - 1.0) <= 1e-9 && std::abs(anti) <= 1e-9 && a && b;
    return {pass, "breathing " + fmt(breathing, 12) + ", antisymmetric " + fmt(anti, 3) +
                      ", 350/268/288 ranked first in both constructed sets: " + (a && b ? "yes" : "no")};
}

Outcome c13_pipeline() {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto grid = EnergyGrid::uniform(0.0, 700.0, 700);
    double worst_norm = 0.0, worst_renorm = 0.0;
    bool nonneg = true;
    for (int draw = 0; draw < 10; ++draw) {
        std::vector<Spectrum> raw;
        const double bg_level = 0.02 * u(rng);
        Spectrum bg{grid, std::vector<double>(grid.size(), bg_level), 10.0};
        for (double T : {10.0, 50.0, 150.0, 300.0}) {
            Spectrum s{grid, std::vector<double>(grid.size(), 0.0), T};
            for (int k = 0; k < 4; ++k) {
                const double c = 40.0 + 500.0 * u(rng), w = 5.0 + 40.0 * u(rng), h = u(rng);
                for (std::size_t i = 0; i < grid.size(); ++i)
                    s.intensity[i] += h * std::exp(-0.5 * std::pow((grid.centers()[i] - c) / w, 2));
            }
            s.intensity[1] += 50.0; // elastic line
            for (double& v : s.intensity) v += bg_level + 0.01 * (u(rng) - 0.5);
            raw.push_back(s);
        }
        ins::CorrectionConfig cfg;
        cfg.background = bg;
        const auto out = ins::correct(SpectrumSet(raw), cfg);
        const auto again = ins::renormalize(out, cfg.normalization_cutoff_cm);
        for (std::size_t k = 0; k < out.size(); ++k) {
            const auto& s = out.spectra()[k];
            nonneg = nonneg && s.non_negative();
            worst_norm = std::max(worst_norm, std::abs(integrate_range(s.intensity, grid, 0.0, 600.0) - 1.0));
            for (std::size_t i = 0; i < grid.size(); ++i)
                worst_renorm = std::max(worst_renorm, std::abs(again.spectra()[k].intensity[i] - s.intensity[i]) /
                                                          std::max(1e-300, std::abs(s.intensity[i])));
        }
    }
    const bool pass = nonneg && worst_norm <= 1e-12 && worst_renorm <= 1e-12;
    return {pass, std::string("non-negative: ") + (nonneg ? "yes" : "no") + ", max |integral - 1| " +
                      fmt(worst_norm, 3) + ", max relative renormalization change " + fmt(worst_renorm, 3) +
                      " over 10 random raw sets"};
}

#ifdef SPCLAB_CLI_PATH
int shell(const std::string& cmd) {
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const std::filesystem::path& p, bool drop_timestamps = false) {
    std::ifstream in(p, std::ios::binary);
    if (!in) return "<missing " + p.string() + ">";
    std::string line, out;
    while (std::getline(in, line))
        if (!drop_timestamps || line.find("\"timestamp") == std::string::npos) out += line + "\n";
    return out;
}
#endif

Outcome c14_determinism() {
#ifndef SPCLAB_CLI_PATH
    return {false, "command-line tool not built (SPCLAB_BUILD_TOOLS=OFF)"};
#else
    namespace fs = std::filesystem;
    const std::string cli = SPCLAB_CLI_PATH;
    const fs::path root = fs::temp_directory_path() / ("spclab_acceptance_" + std::to_string(getpid()));
    fs::remove_all(root);
    fs::create_directories(root);
    auto q = [](const fs::path& p) { return "\"" + p.string() + "\""; };
    const std::vector<std::string> commands{"synth dataset --seed 11", "correct",        "t1 fit-traces",
                                            "t1 localmode --modes 2",  "t1 debye",       "spc fit",
                                            "spc scan",                "spc sweep",      "lattice volume",
                                            "anharm gruneisen",        "modes rmsd --temp 100", "modes stretch"};
    std::size_t same = 0;
    std::string bad;
    for (std::size_t i = 0; i < commands.size(); ++i) {
        const bool synth = i == 0;
        std::string out[2];
        for (int rep = 0; rep < 2; ++rep) {
            const fs::path dir = root / ("run" + std::to_string(i) + "_" + std::to_string(rep));
            const std::string m = synth ? "" : " --manifest " + q(root / "run0_0" / "manifest.json");
            const int rc = shell("\"" + cli + "\" " + commands[i] + m + " --out " + q(dir) + " > /dev/null 2>&1");
            if (rc != 0) return {false, "'" + commands[i] + "' exited " + std::to_string(rc)};
            out[rep] = slurp(dir / "result.json") + slurp(dir / "run.json", true);
        }
        if (out[0] == out[1])
            ++same;
        else
            bad += " '" + commands[i] + "'";
    }
    fs::remove_all(root);
    return {same == commands.size(), std::to_string(same) + "/" + std::to_string(commands.size()) +
                                         " commands byte-identical across reruns (timestamps excluded)" +
                                         (bad.empty() ? "" : "; differing:" + bad)};
#endif
}

} // namespace

int main() {
    set_warning_sink([](std::string_view) {});
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"two-phonon factor limits", c1_two_phonon_limits},
        {"delta spectrum reduces to the local-mode factor", c2_delta_reduction},
        {"lambda round-trip", c3_lambda_round_trip},
        {"cutoff scan", c4_cutoff_scan},
        {"local-mode fit round-trip", c5_local_modes},
        {"log-slope diagnostics", c6_log_slopes},
        {"spectral-density consistency", c7_spectral_density},
        {"crossover temperature", c8_crossover},
        {"Grueneisen parameter", c9_gruneisen},
        {"volume expansion", c10_volume},
        {"RMSD", c11_rmsd},
        {"stretch character", c12_stretch},
        {"pipeline invariants", c13_pipeline},
        {"CLI determinism", c14_determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  " << (i + 1) << ". " << criteria[i].first << ": " << o.detail
                  << std::endl;
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
    return failed == 0 ? 0 : 1;
}
