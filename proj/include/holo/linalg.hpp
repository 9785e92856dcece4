#pragma once

// Small dense linear-algebra helpers shared by the geometry modules.
// Everything is desk scale (fibers of dimension <= 6), so the emphasis is
// on guarded, deterministic routines rather than performance.

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <unsupported/Eigen/MatrixFunctions>
#include <vector>

#include "holo/errors.hpp"

namespace holo {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Max absolute entry. Used as the matrix norm throughout the reports.
inline double norm_inf(const Mat& a) {
    return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

// Induced infinity norm (max row sum), for condition estimates.
inline double op_norm_inf(const Mat& a) {
    return a.size() == 0 ? 0.0 : a.cwiseAbs().rowwise().sum().maxCoeff();
}

// Inverse by partial-pivot LU column solves, guarded by a condition-number
// estimate. `what` names the matrix in the error message.
inline Mat inverse_guarded(const Mat& a, double cond_limit, const std::string& what) {
    Eigen::PartialPivLU<Mat> lu(a);
    Mat inv = lu.solve(Mat::Identity(a.rows(), a.cols()));
    double cond = op_norm_inf(a) * op_norm_inf(inv);
    if (!std::isfinite(cond) || cond > cond_limit)
        throw numeric_error("singular " + what + " (condition estimate " +
                            std::to_string(cond) + ")");
    return inv;
}

// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
inline Mat cholesky_factor(const Mat& g, const std::string& what) {
    Eigen::LLT<Mat> llt(g);
    if (llt.info() != Eigen::Success)
        throw numeric_error(what + " is not positive definite");
    return Mat(llt.matrixL());
}

struct SymEigen {
    Vec values; // ascending
    Mat vectors; // columns
};

inline SymEigen sym_eigen(const Mat& a) {
    Eigen::SelfAdjointEigenSolver<Mat> es(a);
    if (es.info() != Eigen::Success) throw numeric_error("symmetric eigensolver failed");
    return {es.eigenvalues(), es.eigenvectors()};
}

inline double min_eigenvalue_sym(const Mat& a) {
    return sym_eigen(a).values.minCoeff();
}

// Orthonormal basis (columns) of the null space {x : Ax = 0}, with rank
// decided by singular values below rel_tol * sigma_max.
inline Mat null_space(const Mat& a, double rel_tol) {
    if (a.rows() == 0 || a.cols() == 0) return Mat::Identity(a.cols(), a.cols());
    Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullV);
    const Vec& s = svd.singularValues();
    double smax = s.size() ? s(0) : 0.0;
    if (smax == 0.0) return Mat::Identity(a.cols(), a.cols());
    long rank = 0;
    for (long i = 0; i < s.size(); ++i)
        if (s(i) > rel_tol * smax) ++rank;
    return svd.matrixV().rightCols(a.cols() - rank);
}

// Orthonormal basis (columns) of the column span of A, rank decided as above.
inline Mat orthonormal_span(const Mat& a, double rel_tol) {
    if (a.rows() == 0 || a.cols() == 0) return Mat(a.rows(), 0);
    Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeThinU);
    const Vec& s = svd.singularValues();
    double smax = s.size() ? s(0) : 0.0;
    if (smax == 0.0) return Mat(a.rows(), 0);
    long rank = 0;
    for (long i = 0; i < s.size(); ++i)
        if (s(i) > rel_tol * smax) ++rank;
    return svd.matrixU().leftCols(rank);
}

// Principal logarithm of a (numerically) orthogonal matrix, skew-projected.
// Returns nullopt when some eigenvalue lies within `exclusion` of -1, where
// the principal branch is ill-conditioned: for orthogonal Q the eigenvalues
// are exp(i theta), and |exp(i theta) + 1| < r iff cos(theta) < -1 + r^2/2,
// which is visible on the spectrum of the symmetric part.
inline std::optional<Mat> principal_log_orthogonal(const Mat& q, double exclusion) {
    Mat sym = 0.5 * (q + q.transpose());
    double low = min_eigenvalue_sym(sym);
    if (low < -1.0 + 0.5 * exclusion * exclusion) return std::nullopt;
    Mat lg = q.log();
    return Mat(0.5 * (lg - lg.transpose()));
}

// Nearest orthogonal matrix in Frobenius norm (polar factor).
inline Mat polar_orthogonal(const Mat& m) {
    Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().transpose();
}

// Column-stacking vec and its inverse, for operators on matrix space.
inline Vec vec_of(const Mat& m) {
    return Eigen::Map<const Vec>(m.data(), m.size());
}

inline Mat mat_of(const Vec& v, long rows, long cols) {
    return Eigen::Map<const Mat>(v.data(), rows, cols);
}

} // namespace holo
