#include "estkit/gaussian.hpp"

#include <cmath>
#include <numbers>

namespace estkit {

FilterDivergence::FilterDivergence(std::string filter, int step)
    : std::runtime_error(filter + ": covariance not repairable at step " + std::to_string(step)),
      filter_(std::move(filter)),
      step_(step) {}

namespace {

void check_belief(const GaussianBelief& b, const char* what) {
    require_finite(b.mean, what);
    require_finite(b.cov, what);
    if (b.cov.rows() != b.cov.cols() || b.cov.rows() != b.mean.size()) {
        throw DimensionMismatch(std::string(what) + ": mean/cov dimensions disagree");
    }
}

}  // namespace

double gaussian_pdf(const GaussianBelief& b, const Vector& xi) {
    check_belief(b, "gaussian_pdf");
    require_finite(xi, "gaussian_pdf");
    if (xi.size() != b.dim()) {
        throw DimensionMismatch("gaussian_pdf: point dimension mismatch");
    }
    const Matrix l = cholesky_lower(b.cov);
    const Vector delta = xi - b.mean;
    const Vector y = l.triangularView<Eigen::Lower>().solve(delta);
    const double quad = y.squaredNorm();
    const double log_sqrt_det = l.diagonal().array().log().sum();
    const double n = static_cast<double>(b.dim());
    return std::exp(-0.5 * quad - log_sqrt_det - 0.5 * n * std::log(2.0 * std::numbers::pi));
}

GaussianBelief linear_transform(const GaussianBelief& b, const Matrix& a, const Vector& c) {
    check_belief(b, "linear_transform");
    require_finite(a, "linear_transform");
    require_finite(c, "linear_transform");
    if (a.cols() != b.dim() || c.size() != a.rows()) {
        throw DimensionMismatch("linear_transform: incompatible dimensions");
    }
    return {a * b.mean + c, symmetrize(a * b.cov * a.transpose())};
}

GaussianBelief linear_transform(const GaussianBelief& b, const Matrix& a) {
    return linear_transform(b, a, Vector::Zero(a.rows()));
}

GaussianBelief linear_combine(const GaussianBelief& bx, const GaussianBelief& by,
                              const Matrix& pxy, const Matrix& a, const Matrix& b,
                              const Vector& c) {
    check_belief(bx, "linear_combine");
    check_belief(by, "linear_combine");
    require_finite(pxy, "linear_combine");
    require_finite(a, "linear_combine");
    require_finite(b, "linear_combine");
    require_finite(c, "linear_combine");
    if (a.cols() != bx.dim() || b.cols() != by.dim() || a.rows() != b.rows() ||
        c.size() != a.rows() || pxy.rows() != bx.dim() || pxy.cols() != by.dim()) {
        throw DimensionMismatch("linear_combine: incompatible dimensions");
    }
    const Vector mean = a * bx.mean + b * by.mean + c;
    const Matrix cov = a * bx.cov * a.transpose() + a * pxy * b.transpose() +
                       b * pxy.transpose() * a.transpose() + b * by.cov * b.transpose();
    return {mean, symmetrize(cov)};
}

MeasurementUpdate condition_on_measurement_with_gain(const GaussianBelief& prior,
                                                     const Matrix& h, const Matrix& r,
                                                     const Vector& z) {
    check_belief(prior, "condition_on_measurement");
    require_finite(h, "condition_on_measurement");
    require_finite(r, "condition_on_measurement");
    require_finite(z, "condition_on_measurement");
    if (h.cols() != prior.dim() || r.rows() != h.rows() || r.cols() != h.rows() ||
        z.size() != h.rows()) {
        throw DimensionMismatch("condition_on_measurement: incompatible dimensions");
    }
    const Matrix hp = h * prior.cov;
    const Matrix innovation_cov = symmetrize(hp * h.transpose() + r);
    // K = P H^T S^{-1}, realized as S K^T = H P.
    const Matrix gain = solve_spd(innovation_cov, hp).transpose();
    const Vector mean = prior.mean + gain * (z - h * prior.mean);
    const Matrix cov = symmetrize(prior.cov - gain * hp);
    return {{mean, cov}, gain};
}

GaussianBelief condition_on_measurement(const GaussianBelief& prior, const Matrix& h,
                                        const Matrix& r, const Vector& z) {
    return condition_on_measurement_with_gain(prior, h, r, z).posterior;
}

FusedScalar fuse_scalar_pair(double z1, double var1, double z2, double var2) {
    if (!(var1 > 0.0) || !(var2 > 0.0)) {
        throw std::invalid_argument("fuse_scalar_pair: variances must be positive");
    }
    if (!std::isfinite(z1) || !std::isfinite(z2)) {
        throw NonFiniteValue("fuse_scalar_pair: non-finite reading");
    }
    const double sum = var1 + var2;
    return {(var2 * z1 + var1 * z2) / sum, var1 * var2 / sum};
}

double correlation_coefficient(const Matrix& p, Eigen::Index i, Eigen::Index j) {
    require_finite(p, "correlation_coefficient");
    if (i < 0 || j < 0 || i >= p.rows() || j >= p.cols() || p.rows() != p.cols()) {
        throw DimensionMismatch("correlation_coefficient: index out of range");
    }
    const double vi = p(i, i);
    const double vj = p(j, j);
    if (!(vi > 0.0) || !(vj > 0.0)) {
        throw std::invalid_argument("correlation_coefficient: zero diagonal entry");
    }
    return p(i, j) / (std::sqrt(vi) * std::sqrt(vj));
}

bool is_cov_psd(const Matrix& p) {
    if (p.rows() != p.cols() || !p.allFinite()) {
        return false;
    }
    if (p.isZero(0.0)) {
        return true;  // a perfectly known state is a valid degenerate belief
    }
    const Matrix bumped =
        p + 1e-12 * p.trace() * Matrix::Identity(p.rows(), p.cols());
    Eigen::LLT<Matrix> llt(bumped);
    return llt.info() == Eigen::Success;
}

Matrix guard_covariance(const Matrix& p, int& jitter_count, const std::string& filter,
                        int step) {
    if (is_cov_psd(p)) {
        return p;
    }
    const Matrix repaired =
        p + 1e-9 * p.trace() * Matrix::Identity(p.rows(), p.cols());
    if (is_cov_psd(repaired)) {
        ++jitter_count;
        return repaired;
    }
    throw FilterDivergence(filter, step);
}

}  // namespace estkit
