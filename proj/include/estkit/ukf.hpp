#pragma once

#include <functional>

#include "estkit/gaussian.hpp"
#include "estkit/models.hpp"

namespace estkit {

class DegenerateScaling : public std::invalid_argument {
public:
    explicit DegenerateScaling(const std::string& what) : std::invalid_argument(what) {}
};

/// Scaled unscented-transform parameters: alpha spreads the sigma points,
/// beta folds in prior knowledge of the distribution (2 is optimal for a
/// Gaussian), kappa is the secondary scaling term.
struct UkfParams {
    double alpha = 1e-3;
    double beta = 2.0;
    double kappa = 0.0;
};

struct UkfWeights {
    Vector wm;      // mean weights, size 2L+1
    Vector wc;      // covariance weights, size 2L+1
    double lambda;  // alpha^2 (L + kappa) - L
};

/// Weight sequences for state dimension L. The center mean weight is derived
/// from the wing weight so the sequence sums to one at machine precision.
UkfWeights ukf_weights(int dim, const UkfParams& params);

/// 2L+1 sigma vectors stored column-wise; column 0 is the mean and columns i,
/// i+L straddle it symmetrically.
struct SigmaSet {
    Matrix points;
    Vector wm;
    Vector wc;
    double lambda;

    Eigen::Index dim() const { return points.rows(); }
    Eigen::Index count() const { return points.cols(); }
};

SigmaSet sigma_points(const GaussianBelief& b, const UkfWeights& weights);

struct UtResult {
    Vector mean;
    Matrix cov;
    Matrix points;  // transformed sigma points, column-wise
};

/// Propagate a sigma set through g and rebuild mean and covariance from the
/// weighted samples; additive_cov is added to the covariance.
UtResult unscented_transform(const SigmaSet& s, const std::function<Vector(const Vector&)>& g,
                             const Matrix& additive_cov);

struct UkfPrediction {
    GaussianBelief belief;
    SigmaSet propagated;
};

/// Time update: sigma points from b, pushed through model.f_disc, Q added.
UkfPrediction ukf_predict(const GaussianBelief& b, const NonlinearModel& model,
                          const UkfParams& params);

/// Measurement update from the propagated sigma set (no re-draw after the
/// time update; the measurement sigma points are the propagated state points
/// passed through h).
GaussianBelief ukf_update(const GaussianBelief& b_minus, const SigmaSet& propagated,
                          const NonlinearModel& model, const UkfParams& params,
                          const Vector& z);

/// Convenience wrapper carrying belief, parameters, and the jitter tally for
/// benchmark runs.
struct UkfFilter {
    NonlinearModel model;
    UkfParams params;
    GaussianBelief belief;
    int step_count = 0;
    int jitter_count = 0;
};

UkfFilter make_ukf(const NonlinearModel& model, const UkfParams& params,
                   const GaussianBelief& b0);
UkfFilter ukf_step(const UkfFilter& filter, const Vector& z);

}  // namespace estkit
