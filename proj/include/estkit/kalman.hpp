#pragma once

#include <optional>
#include <vector>

#include "estkit/gaussian.hpp"

namespace estkit {

/// Time-invariant linear system x(k+1) = A x(k) + B u(k) + w, z = H x + v,
/// with w ~ N(0, Q) and v ~ N(0, R). Time variation is achieved by re-running
/// with fresh matrices.
struct LinearSystem {
    Matrix a;
    Matrix b;
    Matrix h;
    Matrix q;
    Matrix r;
};

GaussianBelief kf_predict(const GaussianBelief& b, const LinearSystem& sys, const Vector& u);

struct KfUpdate {
    GaussianBelief posterior;
    Matrix gain;
};

KfUpdate kf_update(const GaussianBelief& b_minus, const LinearSystem& sys, const Vector& z);

/// Alternating predict/update over equal-length input and measurement
/// sequences; returns the post-update belief of every step.
std::vector<GaussianBelief> kf_run(const LinearSystem& sys, const GaussianBelief& b0,
                                   const std::vector<Vector>& inputs,
                                   const std::vector<Vector>& measurements);

/// Diagnostic variant keeping the gain of every step.
std::vector<KfUpdate> kf_run_with_gains(const LinearSystem& sys, const GaussianBelief& b0,
                                        const std::vector<Vector>& inputs,
                                        const std::vector<Vector>& measurements);

/// Information-form least squares over a stacked observation model. With no
/// prior the information matrix starts at exactly zero, which is the batch
/// "infinite prior variance" case.
GaussianBelief batch_ls(const Matrix& h_stack, const Matrix& r_stack, const Vector& z_stack,
                        const std::optional<GaussianBelief>& prior = std::nullopt);

}  // namespace estkit
