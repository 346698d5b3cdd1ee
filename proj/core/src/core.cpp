#include "spclab/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace spclab {

EnergyGrid::EnergyGrid(std::vector<double> edges) : edges_(std::move(edges)) {
    if (edges_.size() < 2) throw ValidationError("energy grid needs at least two edges");
    if (!(edges_.front() >= 0.0) || !std::isfinite(edges_.front()))
        throw ValidationError("energy grid first edge must be >= 0");
    for (std::size_t i = 1; i < edges_.size(); ++i) {
        if (!std::isfinite(edges_[i]) || !(edges_[i] > edges_[i - 1])) {
            std::ostringstream os;
            os << "energy grid edges must be strictly increasing (edge " << i << ")";
            throw ValidationError(os.str());
        }
    }
    centers_.resize(edges_.size() - 1);
    for (std::size_t i = 0; i + 1 < edges_.size(); ++i) centers_[i] = 0.5 * (edges_[i] + edges_[i + 1]);
}

EnergyGrid EnergyGrid::uniform(double lo, double hi, std::size_t n) {
    if (n == 0 || !(hi > lo)) throw ValidationError("uniform grid needs n > 0 and hi > lo");
    std::vector<double> e(n + 1);
    const double h = (hi - lo) / static_cast<double>(n);
    for (std::size_t i = 0; i <= n; ++i) e[i] = lo + h * static_cast<double>(i);
    e.back() = hi;
    return EnergyGrid(std::move(e));
}

EnergyGrid EnergyGrid::from_centers(std::span<const double> centers) {
    if (centers.size() < 2) throw ValidationError("need at least two bin centers to infer a grid");
    std::vector<double> e(centers.size() + 1);
    for (std::size_t i = 1; i < centers.size(); ++i) e[i] = 0.5 * (centers[i - 1] + centers[i]);
    e.front() = std::max(0.0, centers.front() - (e[1] - centers.front()));
    e.back() = centers.back() + (centers.back() - e[centers.size() - 1]);
    return EnergyGrid(std::move(e));
}

bool EnergyGrid::is_uniform(double rel_tol) const {
    if (size() == 0) return false;
    const double h = width(0);
    for (std::size_t i = 1; i < size(); ++i)
        if (std::abs(width(i) - h) > rel_tol * h) return false;
    return true;
}

double EnergyGrid::overlap(std::size_t i, double a, double b) const {
    const double lo = std::max(a, edges_[i]);
    const double hi = std::min(b, edges_[i + 1]);
    return hi > lo ? hi - lo : 0.0;
}

std::string_view to_string(Provenance p) {
    switch (p) {
    case Provenance::raw: return "raw";
    case Provenance::corrected: return "corrected";
    case Provenance::normalized: return "normalized";
    case Provenance::dos: return "dos";
    }
    return "raw";
}

Provenance provenance_from_string(std::string_view s) {
    if (s == "raw") return Provenance::raw;
    if (s == "corrected") return Provenance::corrected;
    if (s == "normalized") return Provenance::normalized;
    if (s == "dos") return Provenance::dos;
    throw ValidationError("unknown provenance tag '" + std::string(s) + "'");
}

void Spectrum::validate() const {
    if (intensity.size() != grid.size()) {
        std::ostringstream os;
        os << "spectrum has " << intensity.size() << " intensities for " << grid.size() << " bins";
        throw ValidationError(os.str());
    }
    if (!(temperature_K > 0.0) || !std::isfinite(temperature_K))
        throw ValidationError("spectrum temperature_K must be > 0");
    for (double v : intensity)
        if (!std::isfinite(v)) throw ValidationError("spectrum contains non-finite intensity");
}

bool Spectrum::non_negative() const {
    return std::all_of(intensity.begin(), intensity.end(), [](double v) { return v >= 0.0; });
}

SpectrumSet::SpectrumSet(std::vector<Spectrum> spectra, std::string representation)
    : spectra_(std::move(spectra)), representation_(std::move(representation)) {
    if (spectra_.empty()) throw ValidationError("spectrum set is empty");
    for (const auto& s : spectra_) s.validate();
    std::stable_sort(spectra_.begin(), spectra_.end(),
                     [](const Spectrum& a, const Spectrum& b) { return a.temperature_K < b.temperature_K; });
    for (std::size_t i = 1; i < spectra_.size(); ++i) {
        if (!(spectra_[i].grid == spectra_[0].grid))
            throw ValidationError("spectrum set members must share one energy grid");
        if (!(spectra_[i].temperature_K > spectra_[i - 1].temperature_K)) {
            std::ostringstream os;
            os << "duplicate temperature " << spectra_[i].temperature_K << " K in spectrum set";
            throw ValidationError(os.str());
        }
    }
}

const EnergyGrid& SpectrumSet::grid() const {
    if (spectra_.empty()) throw ValidationError("spectrum set is empty");
    return spectra_.front().grid;
}

double SpectrumSet::t_min() const { return spectra_.at(0).temperature_K; }
double SpectrumSet::t_max() const { return spectra_.at(spectra_.size() - 1).temperature_K; }

std::vector<double> SpectrumSet::temperatures() const {
    std::vector<double> t;
    t.reserve(spectra_.size());
    for (const auto& s : spectra_) t.push_back(s.temperature_K);
    return t;
}

Spectrum resample(const Spectrum& spec, const EnergyGrid& target) {
    spec.validate();
    const auto& src = spec.grid;
    if (target.hi() <= src.lo() || target.lo() >= src.hi()) throw ValidationError("disjoint grids");
    if (src == target) return spec;

    Spectrum out{target, std::vector<double>(target.size(), 0.0), spec.temperature_K, spec.provenance};
    // Two-pointer sweep over both edge lists.
    std::size_t i = 0;
    for (std::size_t j = 0; j < target.size(); ++j) {
        const double a = target.edges()[j];
        const double b = target.edges()[j + 1];
        while (i < src.size() && src.edges()[i + 1] <= a) ++i;
        double acc = 0.0;
        for (std::size_t k = i; k < src.size() && src.edges()[k] < b; ++k)
            acc += spec.intensity[k] * src.overlap(k, a, b);
        out.intensity[j] = acc / target.width(j);
    }
    return out;
}

double integrate(std::span<const double> density, const EnergyGrid& grid) {
    if (density.size() != grid.size()) {
        std::ostringstream os;
        os << "integrate: " << density.size() << " values for " << grid.size() << " bins";
        throw ValidationError(os.str());
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < density.size(); ++i) acc += density[i] * grid.width(i);
    return acc;
}

double integrate_range(std::span<const double> density, const EnergyGrid& grid, double a, double b) {
    if (density.size() != grid.size()) throw ValidationError("integrate_range: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < density.size(); ++i) {
        const double w = grid.overlap(i, a, b);
        if (w > 0.0) acc += density[i] * w;
    }
    return acc;
}

} // namespace spclab
