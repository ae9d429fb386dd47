#pragma once

// Dense matrix carrier, SVD, and residual measures shared by every module.

#include <Eigen/Dense>

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

namespace nrpca {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Raised when a floating-point factorization fails (e.g. SVD non-convergence).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool cond, const std::string& what) {
    if (!cond) throw std::invalid_argument(what);
}

inline std::string shape(const Matrix& m) {
    std::ostringstream os;
    os << m.rows() << "x" << m.cols();
    return os.str();
}

inline void require_same_shape(const Matrix& a, const Matrix& b, const char* ctx) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw std::invalid_argument(std::string(ctx) + ": dimension mismatch (" + shape(a) +
                                    " vs " + shape(b) + ")");
    }
}

} // namespace detail

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

/// Thin SVD factors. `singulars` is nonincreasing and nonnegative, u is m x k,
/// vt is k x n with k = min(m, n).
struct SvdFactors {
    Matrix u;
    Vector singulars;
    Matrix vt;
};

/// Thin SVD with deterministic signs: the first entry of each left singular
/// vector whose magnitude exceeds 1e-12 is made nonnegative, and the matching
/// right singular vector is flipped with it.
inline SvdFactors svd(const Matrix& m) {
    detail::require(m.allFinite(), "svd: input contains non-finite entries");
    Eigen::BDCSVD<Matrix> dec(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (dec.info() != Eigen::Success) {
        throw NumericalError("svd: factorization failed for " + detail::shape(m) + " matrix");
    }
    SvdFactors f{dec.matrixU(), dec.singularValues(), dec.matrixV().transpose()};

    // Eigen already sorts, but the contract is explicit about ordering.
    const Eigen::Index k = f.singulars.size();
    for (Eigen::Index i = 1; i < k; ++i) {
        if (f.singulars(i) > f.singulars(i - 1)) {
            throw NumericalError("svd: backend returned unsorted singular values for " +
                                 detail::shape(m) + " matrix");
        }
    }
    for (Eigen::Index i = 0; i < k; ++i) {
        auto col = f.u.col(i);
        for (Eigen::Index r = 0; r < col.size(); ++r) {
            if (std::abs(col(r)) > 1e-12) {
                if (col(r) < 0) {
                    col = -col;
                    f.vt.row(i) = -f.vt.row(i);
                }
                break;
            }
        }
    }
    return f;
}

inline Matrix reconstruct(const SvdFactors& f) {
    const Eigen::Index k = f.singulars.size();
    if (f.u.cols() != k || f.vt.rows() != k) {
        std::ostringstream os;
        os << "reconstruct: inconsistent factors (u " << detail::shape(f.u) << ", " << k
           << " singulars, vt " << detail::shape(f.vt) << ")";
        throw std::invalid_argument(os.str());
    }
    return f.u * f.singulars.asDiagonal() * f.vt;
}

inline double frobenius_norm(const Matrix& m) { return m.norm(); }

/// ||X - L - S||_F / ||X||_F, or the absolute residual when X is zero.
inline double relative_residual(const Matrix& x, const Matrix& l, const Matrix& s) {
    detail::require_same_shape(x, l, "relative_residual");
    detail::require_same_shape(x, s, "relative_residual");
    const double num = (x - l - s).norm();
    const double den = x.norm();
    return den > 0.0 ? num / den : num;
}

} // namespace nrpca
