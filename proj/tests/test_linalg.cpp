#include <doctest.h>

#include "estkit/linalg.hpp"
#include "estkit/rng.hpp"

using namespace estkit;

namespace {

Matrix mat2(double a, double b, double c, double d) {
    Matrix m(2, 2);
    m << a, b, c, d;
    return m;
}

}  // namespace

TEST_CASE("cholesky_lower identity") {
    const Matrix l = cholesky_lower(Matrix::Identity(2, 2));
    CHECK((l - Matrix::Identity(2, 2)).norm() == doctest::Approx(0.0));
}

TEST_CASE("cholesky_lower 2x2 frozen factor") {
    const Matrix m = mat2(4, 2, 2, 3);
    const Matrix l = cholesky_lower(m);
    CHECK(l(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(l(0, 1) == 0.0);
    CHECK(l(1, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(l(1, 1) == doctest::Approx(1.4142135623730951).epsilon(1e-12));
    // oracle: direct multiplication reproduces m
    CHECK((l * l.transpose() - m).norm() / m.norm() < 1e-9);
}

TEST_CASE("cholesky_lower rejects indefinite matrix") {
    // eigenvalues 3 and -1 by the characteristic polynomial
    CHECK_THROWS_AS(cholesky_lower(mat2(1, 2, 2, 1)), NotPositiveDefinite);
}

TEST_CASE("cholesky_lower rejects asymmetric and non-finite input") {
    CHECK_THROWS_AS(cholesky_lower(mat2(1, 0.5, 0.2, 1)), NotSymmetric);
    Matrix bad = mat2(1, 0, 0, 1);
    bad(0, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(cholesky_lower(bad), NonFiniteValue);
}

TEST_CASE("cholesky_lower round-trips random well-conditioned factors") {
    NormalStream rng{Splitmix64(11)};
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 1 + trial % 6;
        Matrix l = Matrix::Zero(n, n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < i; ++j) {
                l(i, j) = 0.3 * rng.next();
            }
            l(i, i) = 1.0 + std::abs(rng.next());
        }
        const Matrix back = cholesky_lower(Matrix(l * l.transpose()));
        CHECK((back - l).norm() / l.norm() < 1e-9);
    }
}

TEST_CASE("solve_spd identity and diagonal") {
    const Matrix b = mat2(1, 2, 3, 4);
    CHECK((solve_spd(Matrix(Matrix::Identity(2, 2)), b) - b).norm() == doctest::Approx(0.0));

    const Matrix x = solve_spd(mat2(2, 0, 0, 4), Matrix(Matrix::Identity(2, 2)));
    CHECK(x(0, 0) == doctest::Approx(0.5));
    CHECK(x(1, 1) == doctest::Approx(0.25));
    CHECK(x(0, 1) == 0.0);
}

TEST_CASE("solve_spd residual") {
    const Matrix m = mat2(4, 2, 2, 3);
    const Matrix x = solve_spd(m, Matrix(Matrix::Identity(2, 2)));
    CHECK((m * x - Matrix(Matrix::Identity(2, 2))).norm() < 1e-10);
}

TEST_CASE("solve_spd residual stays small for random systems") {
    NormalStream rng{Splitmix64(12)};
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + trial % 5;
        Matrix a(n, n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                a(i, j) = rng.next();
            }
        }
        const Matrix m = a * a.transpose() + Matrix::Identity(n, n);
        Matrix b(n, 2);
        for (int i = 0; i < n; ++i) {
            b(i, 0) = rng.next();
            b(i, 1) = rng.next();
        }
        const Matrix x = solve_spd(m, b);
        CHECK((m * x - b).norm() / b.norm() < 1e-8);
    }
}

TEST_CASE("symmetrize") {
    const Matrix sym = mat2(2, 0.5, 0.5, 3);
    CHECK((symmetrize(sym) - sym).norm() == 0.0);

    const Matrix m = symmetrize(mat2(1, 2, 0, 1));
    CHECK(m(0, 1) == doctest::Approx(1.0));
    CHECK(m(1, 0) == doctest::Approx(1.0));

    NormalStream rng{Splitmix64(13)};
    for (int trial = 0; trial < 20; ++trial) {
        Matrix r(4, 4);
        for (int i = 0; i < 4; ++i) {
            for (int j = 0; j < 4; ++j) {
                r(i, j) = rng.next();
            }
        }
        const Matrix s = symmetrize(r);
        CHECK((s - s.transpose()).norm() == 0.0);       // exactly symmetric
        CHECK((symmetrize(s) - s).norm() == 0.0);       // idempotent
    }
}
