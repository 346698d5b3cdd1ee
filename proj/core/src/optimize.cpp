#include "spclab/optimize.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "spclab/error.hpp"

namespace spclab::optimize {

namespace {

bool all_finite(const Vector& v) { return v.allFinite(); }

} // namespace

Matrix numeric_jacobian(const ResidualFn& residual, const Vector& x, double rel_step) {
    const Vector r0 = residual(x);
    Matrix J(r0.size(), x.size());
    Vector xp = x;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        const double h = rel_step * std::max(1.0, std::abs(x[j]));
        xp[j] = x[j] + h;
        const Vector rp = residual(xp);
        xp[j] = x[j] - h;
        const Vector rm = residual(xp);
        xp[j] = x[j];
        if (all_finite(rp) && all_finite(rm)) {
            J.col(j) = (rp - rm) / (2.0 * h);
        } else if (all_finite(rp)) {
            J.col(j) = (rp - r0) / h;
        } else if (all_finite(rm)) {
            J.col(j) = (r0 - rm) / h;
        } else {
            J.col(j).setZero();
        }
    }
    return J;
}

LmResult levenberg_marquardt(const ResidualFn& residual, const Vector& start, const LmOptions& options,
                             const JacobianFn& jacobian) {
    auto jac = [&](const Vector& x) {
        return jacobian ? jacobian(x) : numeric_jacobian(residual, x, options.fd_step);
    };

    LmResult res;
    res.params = start;
    res.residuals = residual(start);
    if (!all_finite(res.residuals)) throw ConvergenceError("least squares: residual not finite at start point");
    res.ssr = res.residuals.squaredNorm();
    res.jacobian = jac(res.params);

    double mu = -1.0;
    for (res.iterations = 0; res.iterations < options.max_iterations; ++res.iterations) {
        if (res.ssr < 1e-30) {
            res.converged = true;
            res.message = "exact fit";
            break;
        }
        const Matrix A = res.jacobian.transpose() * res.jacobian;
        const Vector g = res.jacobian.transpose() * res.residuals;
        if (g.lpNorm<Eigen::Infinity>() <= 1e-15 * (1.0 + res.ssr)) {
            res.converged = true;
            res.message = "gradient vanished";
            break;
        }
        Vector diag = A.diagonal().cwiseMax(1e-12 * std::max(1.0, A.diagonal().maxCoeff()));
        if (mu < 0.0) mu = options.initial_damping * diag.maxCoeff();

        bool accepted = false;
        double nu = 2.0;
        while (!accepted) {
            Matrix M = A;
            M.diagonal() += mu * diag;
            const Vector step = M.ldlt().solve(-g);
            const Vector trial = res.params + step;
            const Vector r = residual(trial);
            const double ssr = all_finite(r) ? r.squaredNorm() : std::numeric_limits<double>::infinity();
            if (all_finite(step) && ssr < res.ssr) {
                const double rel = (res.ssr - ssr) / std::max(res.ssr, 1e-300);
                const bool small_step = step.norm() <= options.step_tol * (res.params.norm() + options.step_tol);
                res.params = trial;
                res.residuals = r;
                res.ssr = ssr;
                res.jacobian = jac(res.params);
                mu = std::max(mu / 3.0, 1e-300);
                accepted = true;
                if (rel < options.rel_tol || small_step) {
                    res.converged = true;
                    res.message = small_step ? "step below tolerance" : "relative change below tolerance";
                }
            } else {
                mu *= nu;
                nu *= 2.0;
                if (!std::isfinite(mu) || mu > 1e30 * std::max(1.0, diag.maxCoeff())) {
                    res.converged = true;
                    res.message = "no further decrease possible";
                    break;
                }
            }
        }
        if (res.converged) break;
    }
    if (!res.converged) {
        std::ostringstream os;
        os << "iteration limit " << options.max_iterations << " reached, ssr = " << res.ssr;
        res.message = os.str();
    }
    return res;
}

Matrix covariance(const Matrix& jacobian, double ssr) {
    const auto n = jacobian.rows();
    const auto p = jacobian.cols();
    const double s2 = n > p ? ssr / static_cast<double>(n - p) : ssr;
    const Matrix A = jacobian.transpose() * jacobian;
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(A);
    cod.setThreshold(1e-14);
    return s2 * cod.pseudoInverse();
}

Vector standard_errors(const Matrix& jacobian, double ssr) {
    return covariance(jacobian, ssr).diagonal().cwiseMax(0.0).cwiseSqrt();
}

} // namespace spclab::optimize
