#pragma once

#include "estkit/gaussian.hpp"
#include "estkit/models.hpp"

namespace estkit {

/// Linearized Kalman filter: the system and measurement Jacobians are frozen
/// at the construction-time mean and the mean itself is propagated with the
/// frozen linear map, so the model is never re-linearized.
struct LkfFilter {
    NonlinearModel model;
    Matrix a_lin;
    Matrix h_lin;
    GaussianBelief belief;
    int step_count = 0;
    int jitter_count = 0;
};

LkfFilter make_lkf(const NonlinearModel& model, const GaussianBelief& b0);
LkfFilter lkf_step(const LkfFilter& filter, const Vector& z);

/// Extended Kalman filter: re-linearizes f about the pre-propagation mean at
/// every predict and h about the predicted mean at every update.
struct EkfFilter {
    NonlinearModel model;
    GaussianBelief belief;
    int step_count = 0;
    int jitter_count = 0;
};

EkfFilter make_ekf(const NonlinearModel& model, const GaussianBelief& b0);
EkfFilter ekf_predict(const EkfFilter& filter);
EkfFilter ekf_update(const EkfFilter& filter, const Vector& z);
EkfFilter ekf_step(const EkfFilter& filter, const Vector& z);

}  // namespace estkit
