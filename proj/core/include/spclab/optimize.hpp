#pragma once

/// @file
///
/// Levenberg-Marquardt least squares used by every fitter in the library.
/// Callers handle bounds and positivity through parameter transforms.

#include <functional>
#include <string>

#include <Eigen/Dense>

namespace spclab::optimize {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using ResidualFn = std::function<Vector(const Vector&)>;
using JacobianFn = std::function<Matrix(const Vector&)>;

struct LmOptions {
    int max_iterations = 2000;
    /// Stop when an accepted step changes the sum of squares by less than
    /// this fraction.
    double rel_tol = 1e-10;
    double step_tol = 1e-13;
    double initial_damping = 1e-3;
    /// Relative step for central finite differences.
    double fd_step = 1e-6;
};

struct LmResult {
    Vector params;
    Vector residuals;
    Matrix jacobian;
    double ssr = 0.0;
    int iterations = 0;
    bool converged = false;
    std::string message;
};

/// Minimises ||r(p)||^2 from `start`. Uses `jacobian` when given, central
/// differences otherwise. Throws ConvergenceError if the residual is not
/// finite at the start point.
LmResult levenberg_marquardt(const ResidualFn& residual, const Vector& start, const LmOptions& options = {},
                             const JacobianFn& jacobian = {});

Matrix numeric_jacobian(const ResidualFn& residual, const Vector& x, double rel_step);

/// s^2 (J^T J)^+ with s^2 = ssr / (n - p). Pseudo-inverse so that flat
/// directions yield zero rather than infinite variance.
Matrix covariance(const Matrix& jacobian, double ssr);

/// Square roots of the covariance diagonal.
Vector standard_errors(const Matrix& jacobian, double ssr);

} // namespace spclab::optimize
