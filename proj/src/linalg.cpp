#include "estkit/linalg.hpp"

#include <Eigen/Cholesky>

namespace estkit {

void require_finite(const Vector& v, const char* what) {
    if (!v.allFinite()) {
        throw NonFiniteValue(std::string(what) + ": non-finite entry");
    }
}

void require_finite(const Matrix& m, const char* what) {
    if (!m.allFinite()) {
        throw NonFiniteValue(std::string(what) + ": non-finite entry");
    }
}

bool is_symmetric(const Matrix& m, double rel_tol) {
    if (m.rows() != m.cols()) {
        return false;
    }
    const double scale = m.cwiseAbs().maxCoeff();
    const double skew = (m - m.transpose()).cwiseAbs().maxCoeff();
    return skew <= rel_tol * std::max(scale, 1e-300);
}

Matrix cholesky_lower(const Matrix& m) {
    require_finite(m, "cholesky_lower");
    if (m.rows() != m.cols()) {
        throw DimensionMismatch("cholesky_lower: matrix is not square");
    }
    if (!is_symmetric(m)) {
        throw NotSymmetric("cholesky_lower: matrix is not symmetric");
    }
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success) {
        throw NotPositiveDefinite("cholesky_lower: non-positive pivot");
    }
    return llt.matrixL();
}

Matrix solve_spd(const Matrix& m, const Matrix& b) {
    require_finite(b, "solve_spd");
    if (m.rows() != b.rows()) {
        throw DimensionMismatch("solve_spd: incompatible right-hand side");
    }
    const Matrix l = cholesky_lower(m);
    Matrix x = l.triangularView<Eigen::Lower>().solve(b);
    l.triangularView<Eigen::Lower>().transpose().solveInPlace(x);
    return x;
}

Vector solve_spd(const Matrix& m, const Vector& b) {
    const Matrix x = solve_spd(m, Matrix(b));
    return x.col(0);
}

Matrix symmetrize(const Matrix& m) {
    require_finite(m, "symmetrize");
    if (m.rows() != m.cols()) {
        throw DimensionMismatch("symmetrize: matrix is not square");
    }
    return 0.5 * (m + m.transpose());
}

}  // namespace estkit
