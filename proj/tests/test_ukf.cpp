#include <doctest.h>

#include <cmath>

#include "estkit/kalman.hpp"
#include "estkit/rng.hpp"
#include "estkit/ukf.hpp"

using namespace estkit;

namespace {

Matrix random_spd(NormalStream& rng, int n, double ridge) {
    Matrix a(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            a(i, j) = rng.next();
        }
    }
    return Matrix(a * a.transpose() + ridge * Matrix::Identity(n, n));
}

// Neumaier-compensated sum; the default weights are ~1e6 in magnitude and a
// plain sum would swamp the identities being tested.
double compensated_sum(const Vector& v) {
    double sum = 0.0;
    double comp = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double t = sum + v(i);
        comp += std::abs(sum) >= std::abs(v(i)) ? (sum - t) + v(i) : (v(i) - t) + sum;
        sum = t;
    }
    return sum + comp;
}

}  // namespace

TEST_CASE("ukf_weights default parameters, L = 3") {
    const UkfWeights w = ukf_weights(3, UkfParams{});
    REQUIRE(w.wm.size() == 7);
    CHECK(w.wm(0) == doctest::Approx(-999999.0).epsilon(1e-9));
    CHECK(w.wc(0) == doctest::Approx(-999996.000001).epsilon(1e-9));
    CHECK(w.wm(1) == doctest::Approx(166666.6667).epsilon(1e-6));
    CHECK(w.lambda == doctest::Approx(-3.0).epsilon(1e-6));
    for (int i = 1; i < 7; ++i) {
        CHECK(w.wc(i) == w.wm(i));
    }
    // W0c - W0m = 1 - alpha^2 + beta at machine precision of the magnitudes
    const double delta = w.wc(0) - w.wm(0);
    CHECK(std::abs(delta - (1.0 - 1e-6 + 2.0)) <= 4e-16 * std::abs(w.wm(0)));
}

TEST_CASE("ukf_weights benign parameters, L = 1") {
    UkfParams p;
    p.alpha = 1.0;
    p.kappa = 2.0;
    p.beta = 0.0;
    const UkfWeights w = ukf_weights(1, p);
    CHECK(w.lambda == doctest::Approx(2.0));
    CHECK(w.wm(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(w.wc(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(w.wm(1) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("ukf_weights sum to one for many shapes") {
    NormalStream rng{Splitmix64(51)};
    for (int trial = 0; trial < 40; ++trial) {
        UkfParams p;
        p.alpha = std::pow(10.0, -3.0 * std::abs(rng.next()) / 3.0);
        p.kappa = trial % 3 == 0 ? 0.0 : std::abs(rng.next());
        p.beta = 2.0;
        const int dim = 1 + trial % 6;
        const UkfWeights w = ukf_weights(dim, p);
        CHECK(std::abs(compensated_sum(w.wm) - 1.0) <= 1e-12);
    }
}

TEST_CASE("ukf_weights rejects degenerate scaling") {
    UkfParams p;
    p.alpha = 1.0;
    p.kappa = -2.0;  // lambda = -L + (L + kappa) => L + lambda = L - 2
    CHECK_THROWS_AS(ukf_weights(2, p), DegenerateScaling);
    CHECK_THROWS_AS(ukf_weights(0, UkfParams{}), std::invalid_argument);
    UkfParams zero_spread;
    zero_spread.alpha = 0.0;
    CHECK_THROWS_AS(ukf_weights(2, zero_spread), std::invalid_argument);
}

TEST_CASE("sigma_points of N(0,1) with lambda = 2") {
    UkfParams p;
    p.alpha = 1.0;
    p.kappa = 2.0;
    const UkfWeights w = ukf_weights(1, p);
    GaussianBelief b{Vector::Zero(1), Matrix::Identity(1, 1)};
    const SigmaSet s = sigma_points(b, w);
    REQUIRE(s.count() == 3);
    CHECK(s.points(0, 0) == 0.0);
    CHECK(s.points(0, 1) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-15));
    CHECK(s.points(0, 2) == doctest::Approx(-std::sqrt(3.0)).epsilon(1e-15));
}

TEST_CASE("sigma_points reconstruction identities") {
    NormalStream rng{Splitmix64(52)};
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 1 + trial % 5;
        GaussianBelief b;
        b.mean = Vector::Zero(n);
        for (int i = 0; i < n; ++i) {
            b.mean(i) = 2.0 * rng.next();
        }
        b.cov = random_spd(rng, n, static_cast<double>(n));
        const UkfWeights w = ukf_weights(n, UkfParams{});
        const SigmaSet s = sigma_points(b, w);

        // points i and i+L straddle the mean exactly
        for (int i = 1; i <= n; ++i) {
            for (int k = 0; k < n; ++k) {
                CHECK(s.points(k, i) - b.mean(k) == -(s.points(k, i + n) - b.mean(k)));
            }
        }
        // weighted covariance reconstruction (the i = 0 term vanishes)
        Matrix recon = Matrix::Zero(n, n);
        for (Eigen::Index j = 0; j < s.count(); ++j) {
            const Vector d = s.points.col(j) - b.mean;
            recon += s.wc(j) * (d * d.transpose());
        }
        CHECK((recon - b.cov).norm() / b.cov.norm() <= 1e-9);
    }
}

TEST_CASE("sigma_points rejects a collapsed covariance") {
    const UkfWeights w = ukf_weights(2, UkfParams{});
    GaussianBelief b{Vector::Zero(2), Matrix::Zero(2, 2)};
    CHECK_THROWS_AS(sigma_points(b, w), NotPositiveDefinite);
}

TEST_CASE("unscented_transform identity recovers the belief") {
    NormalStream rng{Splitmix64(53)};
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 1 + trial % 4;
        GaussianBelief b;
        b.mean = Vector::Zero(n);
        for (int i = 0; i < n; ++i) {
            b.mean(i) = rng.next();
        }
        b.cov = random_spd(rng, n, 1.0);
        const SigmaSet s = sigma_points(b, ukf_weights(n, UkfParams{}));
        const UtResult ut =
            unscented_transform(s, [](const Vector& x) { return x; }, Matrix::Zero(n, n));
        CHECK((ut.mean - b.mean).norm() <= 1e-9 * std::max(1.0, b.mean.norm()));
        CHECK((ut.cov - b.cov).norm() <= 1e-9 * b.cov.norm());
    }
}

TEST_CASE("unscented_transform matches gaussian linear_transform") {
    NormalStream rng{Splitmix64(54)};
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 2 + trial % 3;
        GaussianBelief b;
        b.mean = Vector::Zero(n);
        for (int i = 0; i < n; ++i) {
            b.mean(i) = rng.next();
        }
        b.cov = random_spd(rng, n, 1.0);
        Matrix a(2, n);
        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < n; ++j) {
                a(i, j) = rng.next();
            }
        }
        const SigmaSet s = sigma_points(b, ukf_weights(n, UkfParams{}));
        const UtResult ut = unscented_transform(
            s, [&](const Vector& x) { return Vector(a * x); }, Matrix::Zero(2, 2));
        const GaussianBelief ref = linear_transform(b, a);
        CHECK((ut.mean - ref.mean).norm() <= 1e-9 * std::max(1.0, ref.mean.norm()));
        CHECK((ut.cov - ref.cov).norm() <= 1e-9 * ref.cov.norm());
    }
}

TEST_CASE("unscented_transform captures the quadratic second moment") {
    UkfParams p;
    p.alpha = 1.0;
    p.kappa = 2.0;
    GaussianBelief b{Vector::Zero(1), Matrix::Identity(1, 1)};
    const SigmaSet s = sigma_points(b, ukf_weights(1, p));
    const UtResult ut = unscented_transform(
        s, [](const Vector& x) { return Vector(x.array().square().matrix()); },
        Matrix::Zero(1, 1));
    CHECK(std::abs(ut.mean(0) - 1.0) <= 1e-12);  // true E[x^2] under N(0,1)
}

TEST_CASE("unscented_transform reports the failing sigma point") {
    GaussianBelief b{Vector::Zero(1), Matrix::Identity(1, 1)};
    const SigmaSet s = sigma_points(b, ukf_weights(1, UkfParams{}));
    CHECK_THROWS_WITH_AS(
        unscented_transform(
            s,
            [](const Vector& x) -> Vector {
                if (x(0) > 0.0) {
                    throw std::domain_error("boom");
                }
                return x;
            },
            Matrix::Zero(1, 1)),
        doctest::Contains("sigma point 1"), std::runtime_error);
}

TEST_CASE("ukf_predict on a linear model matches kf_predict") {
    NormalStream rng{Splitmix64(55)};
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 1 + trial % 3;
        Matrix a(n, n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                a(i, j) = rng.next();
            }
        }
        const Matrix q = 0.1 * random_spd(rng, n, 0.5);
        const NonlinearModel model =
            make_linear_model(a, Matrix::Identity(1, n), q, Matrix::Identity(1, 1));
        GaussianBelief b;
        b.mean = Vector::Zero(n);
        for (int i = 0; i < n; ++i) {
            b.mean(i) = rng.next();
        }
        b.cov = random_spd(rng, n, 1.0);
        const UkfPrediction pred = ukf_predict(b, model, UkfParams{});
        const LinearSystem sys{a, Matrix::Zero(n, 1), Matrix::Identity(1, n), q,
                               Matrix::Identity(1, 1)};
        const GaussianBelief ref = kf_predict(b, sys, Vector::Zero(1));
        CHECK((pred.belief.mean - ref.mean).norm() <= 1e-9 * std::max(1.0, ref.mean.norm()));
        CHECK((pred.belief.cov - ref.cov).norm() <= 1e-9 * ref.cov.norm());
    }
}

TEST_CASE("ukf_predict collapses to the deterministic map as covariance shrinks") {
    const FallingBodyParams body;
    const NonlinearModel model = make_falling_body_model(body, Matrix::Zero(3, 3),
                                                         Matrix::Constant(1, 1, 100.0));
    GaussianBelief b;
    b.mean = (Vector(3) << 1e5, -6000.0, 2000.0).finished();
    b.cov = 1e-18 * Matrix::Identity(3, 3);
    const UkfPrediction pred = ukf_predict(b, model, UkfParams{});
    const Vector truth = falling_body_step(b.mean, body);
    CHECK((pred.belief.mean - truth).norm() <= 1e-6);
}

TEST_CASE("ukf_predict benchmark step against an independent transform") {
    const FallingBodyParams body;
    const Vector stdev = (Vector(3) << 2.0, 5.0, 8.0).finished();
    const NonlinearModel model = make_falling_body_model(
        body, Matrix(stdev * stdev.transpose()), Matrix::Constant(1, 1, 100.0));
    GaussianBelief b;
    b.mean = (Vector(3) << 1e5, -6000.0, 2000.0).finished();
    b.cov = (Vector(3) << 500.0, 2e4, 2.5e5).finished().asDiagonal();
    const UkfPrediction pred = ukf_predict(b, model, UkfParams{});

    // independent route: plain Eigen Cholesky, textbook weights, long double sums
    const UkfParams p;
    const double lambda = p.alpha * p.alpha * (3.0 + p.kappa) - 3.0;
    const double c = 3.0 + lambda;
    const Eigen::LLT<Matrix> llt(Matrix(c * b.cov));
    REQUIRE(llt.info() == Eigen::Success);
    const Matrix root = llt.matrixL();
    std::vector<Vector> chi{b.mean};
    for (int i = 0; i < 3; ++i) {
        chi.push_back(b.mean + root.col(i));
    }
    for (int i = 0; i < 3; ++i) {
        chi.push_back(b.mean - root.col(i));
    }
    long double mean[3] = {0.0L, 0.0L, 0.0L};
    for (std::size_t j = 0; j < chi.size(); ++j) {
        const double w = (j == 0) ? lambda / c : 0.5 / c;
        const Vector y = falling_body_step(chi[j], body);
        for (int k = 0; k < 3; ++k) {
            mean[k] += static_cast<long double>(w) * y(k);
        }
    }
    for (int k = 0; k < 3; ++k) {
        CHECK(std::abs(pred.belief.mean(k) - static_cast<double>(mean[k])) < 1.0);
    }
}

TEST_CASE("ukf_update") {
    SUBCASE("linear measurement matches kf_update when fed a fresh sigma set") {
        NormalStream rng{Splitmix64(56)};
        for (int trial = 0; trial < 10; ++trial) {
            const int n = 1 + trial % 3;
            Matrix h(1, n);
            for (int j = 0; j < n; ++j) {
                h(0, j) = rng.next();
            }
            const Matrix r = Matrix::Constant(1, 1, 0.4 + std::abs(rng.next()));
            const NonlinearModel model =
                make_linear_model(Matrix::Identity(n, n), h, Matrix::Zero(n, n), r);
            GaussianBelief prior;
            prior.mean = Vector::Zero(n);
            for (int i = 0; i < n; ++i) {
                prior.mean(i) = rng.next();
            }
            prior.cov = random_spd(rng, n, 1.0);
            const SigmaSet s = sigma_points(prior, ukf_weights(n, UkfParams{}));
            const Vector z = Vector::Constant(1, rng.next());
            const GaussianBelief post = ukf_update(prior, s, model, UkfParams{}, z);
            const LinearSystem sys{Matrix::Identity(n, n), Matrix::Zero(n, 1), h,
                                   Matrix::Zero(n, n), r};
            const GaussianBelief ref = kf_update(prior, sys, z).posterior;
            CHECK((post.mean - ref.mean).norm() <= 1e-9 * std::max(1.0, ref.mean.norm()));
            CHECK((post.cov - ref.cov).norm() <= 1e-9 * ref.cov.norm());
        }
    }
    SUBCASE("zero innovation leaves the mean") {
        const FallingBodyParams body;
        const NonlinearModel model = make_falling_body_model(body, Matrix::Identity(3, 3),
                                                             Matrix::Constant(1, 1, 100.0));
        GaussianBelief b;
        b.mean = (Vector(3) << 1e5, -6000.0, 2000.0).finished();
        b.cov = (Vector(3) << 500.0, 2e4, 2.5e5).finished().asDiagonal();
        const UkfPrediction pred = ukf_predict(b, model, UkfParams{});
        // x1 is a linear functional, so the predicted measurement mean equals
        // the predicted state's first component; feeding it back zeroes the
        // innovation
        const Vector z_pred = Vector::Constant(1, pred.belief.mean(0));
        const GaussianBelief post =
            ukf_update(pred.belief, pred.propagated, model, UkfParams{}, z_pred);
        CHECK((post.mean - pred.belief.mean).norm() <= 1e-9 * pred.belief.mean.norm());
        CHECK(post.cov(0, 0) < pred.belief.cov(0, 0));
    }
    SUBCASE("near-infinite measurement noise is ignored") {
        const FallingBodyParams body;
        const NonlinearModel model = make_falling_body_model(body, Matrix::Identity(3, 3),
                                                             Matrix::Constant(1, 1, 1e12));
        GaussianBelief b;
        b.mean = (Vector(3) << 1e5, -6000.0, 2000.0).finished();
        b.cov = (Vector(3) << 500.0, 2e4, 2.5e5).finished().asDiagonal();
        const UkfPrediction pred = ukf_predict(b, model, UkfParams{});
        const GaussianBelief post = ukf_update(pred.belief, pred.propagated, model,
                                               UkfParams{}, Vector::Constant(1, 5e5));
        CHECK((post.mean - pred.belief.mean).norm() <= 1e-4 * pred.belief.mean.norm());
        CHECK((post.cov - pred.belief.cov).norm() <= 1e-6 * pred.belief.cov.norm());
    }
}

TEST_CASE("full UKF equals the linear KF over 50 steps (zero process noise)") {
    NormalStream rng{Splitmix64(57)};
    for (int trial = 0; trial < 3; ++trial) {
        const int n = 1 + trial % 3;
        Matrix a(n, n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                a(i, j) = rng.next();
            }
        }
        a *= 0.9 / std::max(a.norm(), 1e-12);
        const Matrix h = Matrix::Identity(1, n);
        const Matrix q = Matrix::Zero(n, n);
        const Matrix r = Matrix::Identity(1, 1);
        const NonlinearModel model = make_linear_model(a, h, q, r);
        const LinearSystem sys{a, Matrix::Zero(n, 1), h, q, r};
        GaussianBelief b0;
        b0.mean = Vector::Zero(n);
        for (int i = 0; i < n; ++i) {
            b0.mean(i) = rng.next();
        }
        b0.cov = random_spd(rng, n, 1.0);
        GaussianBelief kf = b0;
        UkfFilter ukf = make_ukf(model, UkfParams{}, b0);
        for (int k = 0; k < 50; ++k) {
            const Vector z = Vector::Constant(1, rng.next());
            kf = kf_update(kf_predict(kf, sys, Vector::Zero(1)), sys, z).posterior;
            ukf = ukf_step(ukf, z);
            CHECK((ukf.belief.mean - kf.mean).norm() <=
                  1e-6 * std::max(1.0, kf.mean.norm()));
            CHECK((ukf.belief.cov - kf.cov).norm() <= 1e-6 * std::max(kf.cov.norm(), 1e-12));
        }
        // Q = 0 drives the covariance to numerical singularity; the jitter
        // policy repairs each collapse once and equality still holds above.
        CHECK(ukf.jitter_count <= 10);
    }
}
