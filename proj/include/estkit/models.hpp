#pragma once

#include <functional>

#include "estkit/linalg.hpp"

namespace estkit {

class ZeroBallisticCoefficient : public std::domain_error {
public:
    ZeroBallisticCoefficient()
        : std::domain_error("falling body: ballistic coefficient is zero") {}
};

/// Discrete-time nonlinear model contract used by the LKF/EKF/UKF: state map
/// with Jacobian, measurement map with Jacobian, and the noise covariances.
struct NonlinearModel {
    std::function<Vector(const Vector&, double)> f_disc;
    std::function<Matrix(const Vector&, double)> jac_f;
    std::function<Vector(const Vector&)> h;
    std::function<Matrix(const Vector&)> jac_h;
    Matrix q;
    Matrix r;
    double dt = 1.0;
};

/// One-dimensional radar tracking of a body falling straight down. State is
/// [altitude ft, velocity ft/s (negative = down), ballistic coefficient].
struct FallingBodyParams {
    double rho0 = 2.377e-3;       // sea-level air density, slugs/ft^3
    double gravity = 32.4;        // ft/s^2
    double scale_height = 22000;  // e-folding altitude of the atmosphere, ft
    double dt = 1.0;              // s
};

/// rho0 * exp(-altitude / scale_height). Negative altitude extrapolates.
double air_density(double altitude, const FallingBodyParams& p);

/// [x2, rho(x1) x2^2 / (2 x3) - g, 0]
Vector falling_body_deriv(const Vector& x, const FallingBodyParams& p);

/// Euler-Maruyama step x + deriv(x) dt + w. The noise increment w is drawn by
/// the caller; with w = 0 the step is deterministic.
Vector falling_body_step(const Vector& x, const FallingBodyParams& p, const Vector& w);
Vector falling_body_step(const Vector& x, const FallingBodyParams& p);

/// Jacobian of the discrete map x + deriv(x) dt.
Matrix falling_body_jacobian(const Vector& x, const FallingBodyParams& p);

/// Central-difference Jacobian of an arbitrary map, with the step scaled per
/// coordinate by max(1, |x_j|). Test oracle for the analytic Jacobians.
Matrix finite_diff_jacobian(const std::function<Vector(const Vector&)>& map, const Vector& x,
                            double eps);

/// Falling-body model with measurement z = x1 + v.
NonlinearModel make_falling_body_model(const FallingBodyParams& p, const Matrix& q,
                                       const Matrix& r);

/// Linear maps x -> A x, z -> H x wrapped in the nonlinear contract. On such a
/// model the LKF, EKF, and UKF all degenerate to the linear Kalman filter.
NonlinearModel make_linear_model(const Matrix& a, const Matrix& h, const Matrix& q,
                                 const Matrix& r, double dt = 1.0);

}  // namespace estkit
