#pragma once

// Helpers shared by the rate-model fitters. Not installed.

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

namespace spclab::detail {

inline double logistic(double u) { return 1.0 / (1.0 + std::exp(-u)); }
inline double logit(double s) { return std::log(s / (1.0 - s)); }

/// Maps u to [lo, hi] logarithmically: lo * (hi / lo)^logistic(u).
struct LogBounded {
    double ln_lo;
    double ln_hi;
    LogBounded(double lo, double hi) : ln_lo(std::log(lo)), ln_hi(std::log(hi)) {}
    double value(double u) const { return std::exp(ln_lo + (ln_hi - ln_lo) * logistic(u)); }
    /// d value / d u
    double derivative(double u) const {
        const double s = logistic(u);
        return value(u) * (ln_hi - ln_lo) * s * (1.0 - s);
    }
    double inverse(double v) const {
        double s = (std::log(v) - ln_lo) / (ln_hi - ln_lo);
        s = std::clamp(s, 1e-9, 1.0 - 1e-9);
        return logit(s);
    }
};

/// Non-negative starting amplitudes for rate_i ~ sum_j a_j basis(i, j),
/// from least squares on relative residuals. Negative or zero solutions are
/// replaced by a small positive share of the mean rate.
inline std::vector<double> positive_amplitude_guess(const Eigen::MatrixXd& basis, const Eigen::VectorXd& rates) {
    const auto n = basis.rows();
    const auto m = basis.cols();
    Eigen::MatrixXd A(n, m);
    for (Eigen::Index i = 0; i < n; ++i) A.row(i) = basis.row(i) / rates[i];
    const Eigen::VectorXd b = Eigen::VectorXd::Ones(n);
    const Eigen::VectorXd sol = A.colPivHouseholderQr().solve(b);
    std::vector<double> out(static_cast<std::size_t>(m));
    for (Eigen::Index j = 0; j < m; ++j) {
        const double col_mean = basis.col(j).cwiseAbs().mean();
        const double fallback = col_mean > 0.0 ? 1e-3 * rates.mean() / col_mean : 1e-6;
        const double v = sol[j];
        out[static_cast<std::size_t>(j)] = (std::isfinite(v) && v > 0.0) ? v : fallback;
    }
    return out;
}

/// Lexicographic order on (ssr, params) used for best-of selection.
inline bool better_start(double ssr_a, const Eigen::VectorXd& a, double ssr_b, const Eigen::VectorXd& b) {
    if (ssr_a != ssr_b) return ssr_a < ssr_b;
    return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

inline std::vector<double> log_spaced(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    if (n == 1) {
        v[0] = std::sqrt(lo * hi);
        return v;
    }
    for (std::size_t i = 0; i < n; ++i)
        v[i] = lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(n - 1));
    return v;
}

} // namespace spclab::detail
