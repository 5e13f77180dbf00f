#include "estkit/kalman.hpp"

namespace estkit {

namespace {

void check_system(const LinearSystem& sys, Eigen::Index n) {
    require_finite(sys.a, "LinearSystem.a");
    require_finite(sys.b, "LinearSystem.b");
    require_finite(sys.h, "LinearSystem.h");
    require_finite(sys.q, "LinearSystem.q");
    require_finite(sys.r, "LinearSystem.r");
    if (sys.a.rows() != n || sys.a.cols() != n || sys.b.rows() != n ||
        sys.h.cols() != n || sys.q.rows() != n || sys.q.cols() != n ||
        sys.r.rows() != sys.h.rows() || sys.r.cols() != sys.h.rows()) {
        throw DimensionMismatch("LinearSystem: matrices do not conform");
    }
}

}  // namespace

GaussianBelief kf_predict(const GaussianBelief& b, const LinearSystem& sys, const Vector& u) {
    check_system(sys, b.dim());
    require_finite(u, "kf_predict");
    if (u.size() != sys.b.cols()) {
        throw DimensionMismatch("kf_predict: input dimension mismatch");
    }
    const Vector mean = sys.a * b.mean + sys.b * u;
    const Matrix cov = symmetrize(sys.a * b.cov * sys.a.transpose() + sys.q);
    return {mean, cov};
}

KfUpdate kf_update(const GaussianBelief& b_minus, const LinearSystem& sys, const Vector& z) {
    check_system(sys, b_minus.dim());
    const MeasurementUpdate upd =
        condition_on_measurement_with_gain(b_minus, sys.h, sys.r, z);
    return {upd.posterior, upd.gain};
}

std::vector<KfUpdate> kf_run_with_gains(const LinearSystem& sys, const GaussianBelief& b0,
                                        const std::vector<Vector>& inputs,
                                        const std::vector<Vector>& measurements) {
    if (inputs.size() != measurements.size()) {
        throw DimensionMismatch("kf_run: input/measurement sequence lengths differ");
    }
    std::vector<KfUpdate> out;
    out.reserve(measurements.size());
    GaussianBelief belief = b0;
    for (std::size_t k = 0; k < measurements.size(); ++k) {
        try {
            const GaussianBelief predicted = kf_predict(belief, sys, inputs[k]);
            out.push_back(kf_update(predicted, sys, measurements[k]));
        } catch (const NotPositiveDefinite& e) {
            throw NotPositiveDefinite("kf_run: step " + std::to_string(k) + ": " + e.what());
        }
        belief = out.back().posterior;
    }
    return out;
}

std::vector<GaussianBelief> kf_run(const LinearSystem& sys, const GaussianBelief& b0,
                                   const std::vector<Vector>& inputs,
                                   const std::vector<Vector>& measurements) {
    std::vector<GaussianBelief> out;
    for (auto& upd : kf_run_with_gains(sys, b0, inputs, measurements)) {
        out.push_back(std::move(upd.posterior));
    }
    return out;
}

GaussianBelief batch_ls(const Matrix& h_stack, const Matrix& r_stack, const Vector& z_stack,
                        const std::optional<GaussianBelief>& prior) {
    require_finite(h_stack, "batch_ls");
    require_finite(r_stack, "batch_ls");
    require_finite(z_stack, "batch_ls");
    const Eigen::Index n = h_stack.cols();
    const Eigen::Index m = h_stack.rows();
    if (r_stack.rows() != m || r_stack.cols() != m || z_stack.size() != m) {
        throw DimensionMismatch("batch_ls: stacked dimensions do not conform");
    }
    Matrix info = Matrix::Zero(n, n);
    Vector rhs = Vector::Zero(n);
    if (m > 0) {
        const Matrix rinv_h = solve_spd(r_stack, h_stack);
        const Vector rinv_z = solve_spd(r_stack, z_stack);
        info += h_stack.transpose() * rinv_h;
        rhs += h_stack.transpose() * rinv_z;
    }
    if (prior) {
        if (prior->dim() != n) {
            throw DimensionMismatch("batch_ls: prior dimension mismatch");
        }
        const Matrix p0_inv = solve_spd(prior->cov, Matrix(Matrix::Identity(n, n)));
        info += p0_inv;
        rhs += p0_inv * prior->mean;
    }
    info = symmetrize(info);
    Matrix cov;
    Vector mean;
    try {
        cov = symmetrize(solve_spd(info, Matrix(Matrix::Identity(n, n))));
        mean = solve_spd(info, rhs);
    } catch (const NotPositiveDefinite&) {
        throw NotPositiveDefinite("batch_ls: information matrix singular (unobservable)");
    }
    return {mean, cov};
}

}  // namespace estkit
