#include "spclab/thermal.hpp"

#include <cmath>
#include <sstream>

namespace spclab::thermal {

double reduced_energy(double energy_cm, double temperature_K) {
    if (!(energy_cm > 0.0) || !(temperature_K > 0.0)) {
        std::ostringstream os;
        os << "thermal factors need E > 0 and T > 0 (got E = " << energy_cm << " cm^-1, T = " << temperature_K
           << " K)";
        throw DomainError(os.str());
    }
    return energy_cm / (constants::kB_cm_per_K * temperature_K);
}

double bose_occupation(double energy_cm, double temperature_K) {
    const double x = reduced_energy(energy_cm, temperature_K);
    if (x < small_x) return 1.0 / x - 0.5 + x / 12.0;
    if (x > large_x) return 0.0;
    return 1.0 / std::expm1(x);
}

double two_phonon_factor_x(double x) {
    if (x < small_x) return 1.0 / (x * x) - 1.0 / 12.0 + x * x / 240.0;
    if (x > large_x) return std::exp(-x);
    // e^-x / (1 - e^-x)^2 never overflows.
    const double d = -std::expm1(-x);
    return std::exp(-x) / (d * d);
}

double two_phonon_factor(double energy_cm, double temperature_K) {
    return two_phonon_factor_x(reduced_energy(energy_cm, temperature_K));
}

BoseWeightedSpectrum bose_weight(const Spectrum& spec) {
    spec.validate();
    BoseWeightedSpectrum out{spec.grid, std::vector<double>(spec.grid.size(), 0.0), spec.temperature_K};
    const auto& c = spec.grid.centers();
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (c[i] <= 0.0) continue;
        out.intensity[i] = spec.intensity[i] * bose_occupation(c[i], spec.temperature_K);
    }
    return out;
}

} // namespace spclab::thermal
