#pragma once

// Shared hand-built inputs for unit and acceptance tests.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "spclab/modes.hpp"

namespace spclab::fixtures {

/// Square-planar M(L)4 core on the axes plus two spectator atoms.
inline modes::ModeSet square_planar_atoms() {
    modes::ModeSet ms;
    ms.atoms = {{"Cu", 63.546, {0, 0, 0}, 0.55},   {"N", 14.007, {2, 0, 0}, 0.5},
                {"N", 14.007, {0, 2, 0}, 0.5},     {"N", 14.007, {-2, 0, 0}, 0.5},
                {"N", 14.007, {0, -2, 0}, 0.5},    {"H", 1.008, {4, 1, 0}, 80.27},
                {"C", 12.011, {3, -1, 0}, 0.001}};
    return ms;
}

/// Mode with in-plane radial amplitude `radial[b]` and tangential amplitude
/// `tangential[b]` on ligand b (real-space), plus optional z and spectator
/// motion; converted to a unit mass-weighted eigenvector.
inline modes::Mode core_mode(const modes::ModeSet& ms, double freq, std::vector<double> radial,
                             std::vector<double> tangential, double z = 0.0, double spectator = 0.0) {
    std::vector<double> u(3 * ms.atoms.size(), 0.0);
    const double dirs[4][2] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    for (int b = 0; b < 4; ++b) {
        const int a = b + 1;
        u[3 * a] = radial[b] * dirs[b][0] - tangential[b] * dirs[b][1];
        u[3 * a + 1] = radial[b] * dirs[b][1] + tangential[b] * dirs[b][0];
        u[3 * a + 2] = z;
    }
    u[3 * 5 + 2] = spectator;
    u[3 * 6 + 0] = 0.3 * spectator;
    double n2 = 0.0;
    for (std::size_t a = 0; a < ms.atoms.size(); ++a)
        for (int i = 0; i < 3; ++i) {
            u[3 * a + i] *= std::sqrt(ms.atoms[a].mass_amu);
            n2 += u[3 * a + i] * u[3 * a + i];
        }
    for (double& x : u) x /= std::sqrt(n2);
    return {freq, u};
}

/// Stretch-dominated modes at 350 (pure breathing), 268 and 288 cm^-1
/// (breathing with growing tangential admixture) among bends, out-of-plane
/// and antisymmetric modes.
inline modes::ModeSet porphyrin_like_modes() {
    auto ms = square_planar_atoms();
    const std::vector<double> one{1, 1, 1, 1}, none{0, 0, 0, 0};
    ms.modes = {
        core_mode(ms, 120, none, none, 1.0, 0.2),                      // out-of-plane
        core_mode(ms, 180, {1, 0, 1, 0}, {0, 0, 0, 0}, 0.0, 0.5),       // two-bond stretch
        core_mode(ms, 230, none, one, 0.0, 0.1),                       // rotation-like bend
        core_mode(ms, 268, one, {0.75, 0.75, 0.75, 0.75}),             // score 0.8
        core_mode(ms, 288, one, {1.3333333, 1.3333333, 1.3333333, 1.3333333}),  // score 0.6
        core_mode(ms, 310, {1, -1, 1, -1}, none),                      // antisymmetric
        core_mode(ms, 350, one, none),                                 // breathing
        core_mode(ms, 420, {1, 0, -1, 0}, {0, 1, 0, -1}, 0.0, 0.7),     // asymmetric mix
        core_mode(ms, 780, none, none, 0.0, 1.0),                      // spectator only
    };
    return ms;
}

/// Random unit eigenvectors on a random molecule; frequencies ascending.
inline modes::ModeSet random_mode_set(std::uint64_t seed, std::size_t n_atoms, std::size_t n_modes) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> z(0.0, 1.0);
    modes::ModeSet ms;
    for (std::size_t a = 0; a < n_atoms; ++a)
        ms.atoms.push_back({"X", 1.0 + 60.0 * unif(rng), {z(rng), z(rng), z(rng)}, 5.0 * unif(rng)});
    double f = 20.0;
    for (std::size_t k = 0; k < n_modes; ++k) {
        f += 5.0 + 60.0 * unif(rng);
        std::vector<double> e(3 * n_atoms);
        double n2 = 0.0;
        for (double& x : e) {
            x = z(rng);
            n2 += x * x;
        }
        for (double& x : e) x /= std::sqrt(n2);
        ms.modes.push_back({f, e});
    }
    return ms;
}

} // namespace spclab::fixtures
