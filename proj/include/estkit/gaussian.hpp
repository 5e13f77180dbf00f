#pragma once

#include "estkit/linalg.hpp"

namespace estkit {

/// Mean/covariance pair carried by every filter in this library.
struct GaussianBelief {
    Vector mean;
    Matrix cov;

    Eigen::Index dim() const { return mean.size(); }
};

/// Thrown when a covariance cannot be repaired by the single-jitter policy.
class FilterDivergence : public std::runtime_error {
public:
    FilterDivergence(std::string filter, int step);

    const std::string& filter() const { return filter_; }
    int step() const { return step_; }

private:
    std::string filter_;
    int step_;
};

/// Density of N(mean, cov) at xi. |cov| comes from the Cholesky diagonal.
double gaussian_pdf(const GaussianBelief& b, const Vector& xi);

/// y = A x + c for x ~ b. A may be rectangular.
GaussianBelief linear_transform(const GaussianBelief& b, const Matrix& a, const Vector& c);
GaussianBelief linear_transform(const GaussianBelief& b, const Matrix& a);

/// z = A x + B y + c with cross-covariance pxy between x and y.
GaussianBelief linear_combine(const GaussianBelief& bx, const GaussianBelief& by,
                              const Matrix& pxy, const Matrix& a, const Matrix& b,
                              const Vector& c);

struct MeasurementUpdate {
    GaussianBelief posterior;
    Matrix gain;
};

/// Condition prior on z = H x + v, v ~ N(0, R). The gain is solved against the
/// innovation covariance rather than formed from an explicit inverse. R = 0 is
/// accepted as long as H P H^T alone is positive definite.
MeasurementUpdate condition_on_measurement_with_gain(const GaussianBelief& prior,
                                                     const Matrix& h, const Matrix& r,
                                                     const Vector& z);
GaussianBelief condition_on_measurement(const GaussianBelief& prior, const Matrix& h,
                                        const Matrix& r, const Vector& z);

struct FusedScalar {
    double mean;
    double variance;
};

/// Maximum-likelihood combination of two scalar readings of the same quantity.
FusedScalar fuse_scalar_pair(double z1, double var1, double z2, double var2);

double correlation_coefficient(const Matrix& p, Eigen::Index i, Eigen::Index j);

/// PSD health check used by the filters: Cholesky of p + 1e-12 trace(p) I succeeds.
bool is_cov_psd(const Matrix& p);

/// Single-jitter repair: if p fails the PSD check, add 1e-9 trace(p) I once and
/// recheck; a second failure raises FilterDivergence. Successful jitters are
/// counted through jitter_count.
Matrix guard_covariance(const Matrix& p, int& jitter_count, const std::string& filter,
                        int step);

}  // namespace estkit
