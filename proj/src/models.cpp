#include "estkit/models.hpp"

#include <cmath>

namespace estkit {

namespace {

void check_state(const Vector& x, const char* what) {
    require_finite(x, what);
    if (x.size() != 3) {
        throw DimensionMismatch(std::string(what) + ": falling-body state must have 3 entries");
    }
}

void check_params(const FallingBodyParams& p) {
    if (!(p.rho0 > 0.0) || !(p.gravity > 0.0) || !(p.scale_height > 0.0)) {
        throw std::invalid_argument("FallingBodyParams: fields must be strictly positive");
    }
}

}  // namespace

double air_density(double altitude, const FallingBodyParams& p) {
    check_params(p);
    return p.rho0 * std::exp(-altitude / p.scale_height);
}

Vector falling_body_deriv(const Vector& x, const FallingBodyParams& p) {
    check_state(x, "falling_body_deriv");
    check_params(p);
    if (x(2) == 0.0) {
        throw ZeroBallisticCoefficient();
    }
    const double rho = air_density(x(0), p);
    Vector d(3);
    d(0) = x(1);
    d(1) = rho * x(1) * x(1) / (2.0 * x(2)) - p.gravity;
    d(2) = 0.0;
    return d;
}

Vector falling_body_step(const Vector& x, const FallingBodyParams& p, const Vector& w) {
    check_state(x, "falling_body_step");
    require_finite(w, "falling_body_step");
    if (w.size() != 3) {
        throw DimensionMismatch("falling_body_step: noise increment must have 3 entries");
    }
    if (p.dt < 0.0) {
        throw std::invalid_argument("falling_body_step: dt must be non-negative");
    }
    return x + falling_body_deriv(x, p) * p.dt + w;
}

Vector falling_body_step(const Vector& x, const FallingBodyParams& p) {
    return falling_body_step(x, p, Vector::Zero(3));
}

Matrix falling_body_jacobian(const Vector& x, const FallingBodyParams& p) {
    check_state(x, "falling_body_jacobian");
    check_params(p);
    if (x(2) == 0.0) {
        throw ZeroBallisticCoefficient();
    }
    const double rho = air_density(x(0), p);
    const double drag = rho * x(1) * x(1) / (2.0 * x(2));
    const double dt = p.dt;
    Matrix j(3, 3);
    j << 1.0, dt, 0.0,
        -dt * drag / p.scale_height, 1.0 + dt * rho * x(1) / x(2), -dt * drag / x(2),
        0.0, 0.0, 1.0;
    return j;
}

Matrix finite_diff_jacobian(const std::function<Vector(const Vector&)>& map, const Vector& x,
                            double eps) {
    require_finite(x, "finite_diff_jacobian");
    if (!(eps > 0.0)) {
        throw std::invalid_argument("finite_diff_jacobian: eps must be positive");
    }
    const Eigen::Index n = x.size();
    Matrix j;
    for (Eigen::Index col = 0; col < n; ++col) {
        const double step = eps * std::max(1.0, std::abs(x(col)));
        Vector hi = x;
        Vector lo = x;
        hi(col) += step;
        lo(col) -= step;
        const Vector diff = (map(hi) - map(lo)) / (2.0 * step);
        if (j.size() == 0) {
            j.resize(diff.size(), n);
        }
        j.col(col) = diff;
    }
    return j;
}

NonlinearModel make_falling_body_model(const FallingBodyParams& p, const Matrix& q,
                                       const Matrix& r) {
    check_params(p);
    require_finite(q, "make_falling_body_model");
    require_finite(r, "make_falling_body_model");
    NonlinearModel model;
    model.f_disc = [p](const Vector& x, double dt) {
        FallingBodyParams local = p;
        local.dt = dt;
        return falling_body_step(x, local);
    };
    model.jac_f = [p](const Vector& x, double dt) {
        FallingBodyParams local = p;
        local.dt = dt;
        return falling_body_jacobian(x, local);
    };
    model.h = [](const Vector& x) { return Vector::Constant(1, x(0)); };
    model.jac_h = [](const Vector& x) {
        Matrix h(1, x.size());
        h.setZero();
        h(0, 0) = 1.0;
        return h;
    };
    model.q = q;
    model.r = r;
    model.dt = p.dt;
    return model;
}

NonlinearModel make_linear_model(const Matrix& a, const Matrix& h, const Matrix& q,
                                 const Matrix& r, double dt) {
    require_finite(a, "make_linear_model");
    require_finite(h, "make_linear_model");
    require_finite(q, "make_linear_model");
    require_finite(r, "make_linear_model");
    NonlinearModel model;
    model.f_disc = [a](const Vector& x, double) { return Vector(a * x); };
    model.jac_f = [a](const Vector&, double) { return a; };
    model.h = [h](const Vector& x) { return Vector(h * x); };
    model.jac_h = [h](const Vector&) { return h; };
    model.q = q;
    model.r = r;
    model.dt = dt;
    return model;
}

}  // namespace estkit
