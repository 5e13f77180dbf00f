#include "estkit/ukf.hpp"

#include <bit>
#include <cmath>

namespace estkit {

namespace {

// Clear the low `bits` mantissa bits of v so that small integer multiples of
// the result stay exact.
double trim_mantissa(double v, int bits) {
    int exp = 0;
    const double frac = std::frexp(v, &exp);
    const double scale = static_cast<double>(std::int64_t{1} << 53);
    auto mant = static_cast<std::int64_t>(frac * scale);
    mant &= ~((std::int64_t{1} << bits) - 1);
    return std::ldexp(static_cast<double>(mant) / scale, exp);
}

// Compensated weighted sum of the deviations from the center point
// (two-product + Neumaier accumulation). The scaled UT produces weights of
// order 1/alpha^2 with heavy cancellation; summing raw weighted points would
// lose ~6 digits of the reconstructed mean at the default alpha, so the mean
// is carried as center + weighted deviations instead (identical algebra, the
// weight sequence sums to one).
Vector weighted_deviation_shift(const Vector& w, const Matrix& points) {
    const Eigen::Index rows = points.rows();
    Vector shift(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        double sum = 0.0;
        double comp = 0.0;
        for (Eigen::Index j = 1; j < w.size(); ++j) {
            const double dev = points(r, j) - points(r, 0);
            const double p = w(j) * dev;
            const double p_err = std::fma(w(j), dev, -p);
            const double t = sum + p;
            if (std::abs(sum) >= std::abs(p)) {
                comp += (sum - t) + p;
            } else {
                comp += (p - t) + sum;
            }
            sum = t;
            comp += p_err;
        }
        shift(r) = sum + comp;
    }
    return shift;
}

// Weighted scatter about the weighted mean, accumulated as deviations from
// the center point: sum_{j>=1} wc_j (Yj-Y0)(Yj-Y0)^T + (sum wc - 2) m m^T
// with m = ybar - Y0. Same algebra as deviations about ybar (the covariance
// weights of the wings equal the mean weights), but the huge center weight
// never multiplies accumulated roundoff, so the wing sum stays a sum of PSD
// terms.
Matrix weighted_scatter(const Vector& wc, const Matrix& a_points, const Vector& a_shift,
                        const Matrix& b_points, const Vector& b_shift) {
    Matrix scatter = Matrix::Zero(a_points.rows(), b_points.rows());
    for (Eigen::Index j = 1; j < wc.size(); ++j) {
        const Vector da = a_points.col(j) - a_points.col(0);
        const Vector db = b_points.col(j) - b_points.col(0);
        scatter += wc(j) * (da * db.transpose());
    }
    double wc_sum = 0.0;
    double comp = 0.0;
    for (Eigen::Index j = 0; j < wc.size(); ++j) {
        const double t = wc_sum + wc(j);
        comp += std::abs(wc_sum) >= std::abs(wc(j)) ? (wc_sum - t) + wc(j)
                                                    : (wc(j) - t) + wc_sum;
        wc_sum = t;
    }
    wc_sum += comp;
    scatter += (wc_sum - 2.0) * (a_shift * b_shift.transpose());
    return scatter;
}

// Deviation s such that both mean + s and mean - s are exactly representable,
// keeping the +/- pair exactly symmetric about the mean.
double snap_symmetric_deviation(double mean, double dev) {
    double s = (mean + dev) - mean;
    for (int iter = 0; iter < 4; ++iter) {
        const double minus = mean - s;
        const double s_minus = mean - minus;
        const double plus = mean + s_minus;
        const double s_plus = plus - mean;
        if (s_plus == s_minus) {
            return s_minus;
        }
        s = s_plus;
    }
    return s;
}

}  // namespace

UkfWeights ukf_weights(int dim, const UkfParams& params) {
    if (dim < 1) {
        throw std::invalid_argument("ukf_weights: dimension must be at least 1");
    }
    if (!(params.alpha > 0.0)) {
        throw std::invalid_argument("ukf_weights: alpha must be positive");
    }
    const double l = static_cast<double>(dim);
    const double lambda = params.alpha * params.alpha * (l + params.kappa) - l;
    const double c = l + lambda;
    if (c == 0.0 || !std::isfinite(c)) {
        throw DegenerateScaling("ukf_weights: L + lambda must be nonzero");
    }
    const int wing_count = 2 * dim;
    const double wing =
        trim_mantissa(0.5 / c, std::bit_width(static_cast<unsigned>(wing_count)));
    const double w0m = 1.0 - wing_count * wing;
    const double w0c = w0m + (1.0 - params.alpha * params.alpha + params.beta);
    UkfWeights w;
    w.wm = Vector::Constant(wing_count + 1, wing);
    w.wc = Vector::Constant(wing_count + 1, wing);
    w.wm(0) = w0m;
    w.wc(0) = w0c;
    w.lambda = lambda;
    return w;
}

SigmaSet sigma_points(const GaussianBelief& b, const UkfWeights& weights) {
    require_finite(b.mean, "sigma_points");
    require_finite(b.cov, "sigma_points");
    const Eigen::Index n = b.dim();
    if (weights.wm.size() != 2 * n + 1) {
        throw DimensionMismatch("sigma_points: weights do not match state dimension");
    }
    const double c = static_cast<double>(n) + weights.lambda;
    const Matrix factor = cholesky_lower(c * b.cov);
    SigmaSet s;
    s.points.resize(n, 2 * n + 1);
    s.points.col(0) = b.mean;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index k = 0; k < n; ++k) {
            const double dev = snap_symmetric_deviation(b.mean(k), factor(k, i));
            s.points(k, 1 + i) = b.mean(k) + dev;
            s.points(k, 1 + n + i) = b.mean(k) - dev;
        }
    }
    s.wm = weights.wm;
    s.wc = weights.wc;
    s.lambda = weights.lambda;
    return s;
}

UtResult unscented_transform(const SigmaSet& s, const std::function<Vector(const Vector&)>& g,
                             const Matrix& additive_cov) {
    const Eigen::Index count = s.count();
    Matrix transformed;
    for (Eigen::Index j = 0; j < count; ++j) {
        Vector y;
        try {
            y = g(s.points.col(j));
        } catch (const std::exception& e) {
            throw std::runtime_error("unscented_transform: map failed at sigma point " +
                                     std::to_string(j) + ": " + e.what());
        }
        require_finite(y, "unscented_transform");
        if (transformed.size() == 0) {
            transformed.resize(y.size(), count);
        } else if (y.size() != transformed.rows()) {
            throw DimensionMismatch("unscented_transform: map output dimension varies");
        }
        transformed.col(j) = y;
    }
    const Eigen::Index m = transformed.rows();
    if (additive_cov.rows() != m || additive_cov.cols() != m) {
        throw DimensionMismatch("unscented_transform: additive covariance dimension mismatch");
    }
    const Vector shift = weighted_deviation_shift(s.wm, transformed);
    const Vector mean = transformed.col(0) + shift;
    Matrix cov = weighted_scatter(s.wc, transformed, shift, transformed, shift);
    cov += additive_cov;
    return {mean, symmetrize(cov), transformed};
}

UkfPrediction ukf_predict(const GaussianBelief& b, const NonlinearModel& model,
                          const UkfParams& params) {
    const UkfWeights weights = ukf_weights(static_cast<int>(b.dim()), params);
    const SigmaSet s = sigma_points(b, weights);
    const UtResult ut = unscented_transform(
        s, [&](const Vector& x) { return model.f_disc(x, model.dt); }, model.q);
    UkfPrediction pred;
    pred.belief = {ut.mean, ut.cov};
    pred.propagated = {ut.points, s.wm, s.wc, s.lambda};
    return pred;
}

GaussianBelief ukf_update(const GaussianBelief& b_minus, const SigmaSet& propagated,
                          const NonlinearModel& model, const UkfParams& params,
                          const Vector& z) {
    (void)params;  // the weight sequences travel with the sigma set
    const Eigen::Index count = propagated.count();
    Matrix meas;
    for (Eigen::Index j = 0; j < count; ++j) {
        const Vector y = model.h(propagated.points.col(j));
        if (meas.size() == 0) {
            meas.resize(y.size(), count);
        } else if (y.size() != meas.rows()) {
            throw DimensionMismatch("ukf_update: measurement map output dimension varies");
        }
        meas.col(j) = y;
    }
    const Eigen::Index m = meas.rows();
    if (z.size() != m) {
        throw DimensionMismatch("ukf_update: measurement dimension mismatch");
    }
    const Vector z_shift = weighted_deviation_shift(propagated.wm, meas);
    const Vector z_pred = meas.col(0) + z_shift;
    const Vector x_shift = b_minus.mean - propagated.points.col(0);
    Matrix p_zz = weighted_scatter(propagated.wc, meas, z_shift, meas, z_shift);
    const Matrix p_xz =
        weighted_scatter(propagated.wc, propagated.points, x_shift, meas, z_shift);
    p_zz = symmetrize(p_zz + model.r);
    // K = P_xz P_zz^{-1} via P_zz K^T = P_xz^T.
    const Matrix gain = solve_spd(p_zz, Matrix(p_xz.transpose())).transpose();
    const Vector mean = b_minus.mean + gain * (z - z_pred);
    const Matrix cov = symmetrize(b_minus.cov - gain * p_zz * gain.transpose());
    return {mean, cov};
}

UkfFilter make_ukf(const NonlinearModel& model, const UkfParams& params,
                   const GaussianBelief& b0) {
    return {model, params, b0, 0, 0};
}

UkfFilter ukf_step(const UkfFilter& filter, const Vector& z) {
    UkfFilter next = filter;
    ++next.step_count;
    GaussianBelief belief = filter.belief;
    UkfPrediction pred;
    try {
        pred = ukf_predict(belief, filter.model, filter.params);
    } catch (const NotPositiveDefinite&) {
        // Sigma-point generation needs a strictly factorizable covariance;
        // apply the single-jitter repair and retry once.
        belief.cov += 1e-9 * belief.cov.trace() *
                      Matrix::Identity(belief.dim(), belief.dim());
        ++next.jitter_count;
        try {
            pred = ukf_predict(belief, filter.model, filter.params);
        } catch (const NotPositiveDefinite&) {
            throw FilterDivergence("ukf", next.step_count);
        }
    }
    pred.belief.cov =
        guard_covariance(pred.belief.cov, next.jitter_count, "ukf", next.step_count);
    GaussianBelief posterior =
        ukf_update(pred.belief, pred.propagated, filter.model, filter.params, z);
    posterior.cov =
        guard_covariance(posterior.cov, next.jitter_count, "ukf", next.step_count);
    next.belief = posterior;
    return next;
}

}  // namespace estkit
