#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace estkit {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Thrown when a factorization meets a non-positive pivot. In filter code this
/// usually means a covariance has collapsed or gone indefinite upstream.
class NotPositiveDefinite : public std::runtime_error {
public:
    explicit NotPositiveDefinite(const std::string& what) : std::runtime_error(what) {}
};

class NotSymmetric : public std::invalid_argument {
public:
    explicit NotSymmetric(const std::string& what) : std::invalid_argument(what) {}
};

class NonFiniteValue : public std::invalid_argument {
public:
    explicit NonFiniteValue(const std::string& what) : std::invalid_argument(what) {}
};

class DimensionMismatch : public std::invalid_argument {
public:
    explicit DimensionMismatch(const std::string& what) : std::invalid_argument(what) {}
};

/// Relative tolerance used when deciding whether a matrix is symmetric.
inline constexpr double kSymmetryTol = 1e-9;

void require_finite(const Vector& v, const char* what);
void require_finite(const Matrix& m, const char* what);

bool is_symmetric(const Matrix& m, double rel_tol = kSymmetryTol);

/// Lower Cholesky factor L with positive diagonal, L * L^T = m.
/// Rejects asymmetric input instead of symmetrizing it; callers symmetrize
/// explicitly so that asymmetry bugs surface here.
Matrix cholesky_lower(const Matrix& m);

/// Solve m * X = b for symmetric positive definite m.
Matrix solve_spd(const Matrix& m, const Matrix& b);
Vector solve_spd(const Matrix& m, const Vector& b);

/// (m + m^T) / 2, exactly symmetric.
Matrix symmetrize(const Matrix& m);

}  // namespace estkit
