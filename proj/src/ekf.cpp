#include "estkit/ekf.hpp"

namespace estkit {

LkfFilter make_lkf(const NonlinearModel& model, const GaussianBelief& b0) {
    LkfFilter f;
    f.model = model;
    f.a_lin = model.jac_f(b0.mean, model.dt);
    f.h_lin = model.jac_h(b0.mean);
    f.belief = b0;
    return f;
}

LkfFilter lkf_step(const LkfFilter& filter, const Vector& z) {
    LkfFilter next = filter;
    ++next.step_count;
    const Vector mean_minus = filter.a_lin * filter.belief.mean;
    Matrix cov_minus =
        symmetrize(filter.a_lin * filter.belief.cov * filter.a_lin.transpose() + filter.model.q);
    cov_minus = guard_covariance(cov_minus, next.jitter_count, "lkf", next.step_count);
    GaussianBelief posterior =
        condition_on_measurement({mean_minus, cov_minus}, filter.h_lin, filter.model.r, z);
    posterior.cov =
        guard_covariance(posterior.cov, next.jitter_count, "lkf", next.step_count);
    next.belief = posterior;
    return next;
}

EkfFilter make_ekf(const NonlinearModel& model, const GaussianBelief& b0) {
    return {model, b0, 0, 0};
}

EkfFilter ekf_predict(const EkfFilter& filter) {
    EkfFilter next = filter;
    // Jacobian about the pre-propagation mean, then the nonlinear map.
    const Matrix f_jac = filter.model.jac_f(filter.belief.mean, filter.model.dt);
    const Vector mean_minus = filter.model.f_disc(filter.belief.mean, filter.model.dt);
    Matrix cov_minus =
        symmetrize(f_jac * filter.belief.cov * f_jac.transpose() + filter.model.q);
    cov_minus = guard_covariance(cov_minus, next.jitter_count, "ekf", next.step_count + 1);
    next.belief = {mean_minus, cov_minus};
    return next;
}

EkfFilter ekf_update(const EkfFilter& filter, const Vector& z) {
    EkfFilter next = filter;
    ++next.step_count;
    const Matrix h_jac = filter.model.jac_h(filter.belief.mean);
    const Matrix hp = h_jac * filter.belief.cov;
    const Matrix innovation_cov = symmetrize(hp * h_jac.transpose() + filter.model.r);
    const Matrix gain = solve_spd(innovation_cov, hp).transpose();
    // Nonlinear residual z - h(mean), linear covariance contraction.
    const Vector mean = filter.belief.mean + gain * (z - filter.model.h(filter.belief.mean));
    Matrix cov = symmetrize(filter.belief.cov - gain * hp);
    cov = guard_covariance(cov, next.jitter_count, "ekf", next.step_count);
    next.belief = {mean, cov};
    return next;
}

EkfFilter ekf_step(const EkfFilter& filter, const Vector& z) {
    return ekf_update(ekf_predict(filter), z);
}

}  // namespace estkit
