#pragma once

// Sparsity penalties and their exact shrinkage operators.

#include "nrpca/matrix.hpp"

#include <string>

namespace nrpca {

enum class SparsePenalty {
    EntrywiseL1,   // sum_ij |S_ij|
    ColumnwiseL21, // sum_j ||S_:j||_2
};

inline std::string to_string(SparsePenalty p) {
    return p == SparsePenalty::EntrywiseL1 ? "l1" : "l21";
}

inline double penalty_value(const Matrix& s, SparsePenalty p) {
    if (p == SparsePenalty::EntrywiseL1) return s.cwiseAbs().sum();
    return s.colwise().norm().sum();
}

/// argmin_W tau * penalty(W) + 1/2 ||W - Q||_F^2.
inline Matrix shrink(const Matrix& q, double tau, SparsePenalty p) {
    detail::require(tau > 0.0, "shrink: tau must be positive");
    if (p == SparsePenalty::EntrywiseL1) {
        // sign(0) = 0, so a zero entry stays zero.
        return q.unaryExpr([tau](double v) {
            const double mag = std::abs(v) - tau;
            if (mag <= 0.0) return 0.0;
            return v > 0.0 ? mag : -mag;
        });
    }
    Matrix w = Matrix::Zero(q.rows(), q.cols());
    for (Eigen::Index j = 0; j < q.cols(); ++j) {
        const double norm = q.col(j).norm();
        if (norm > tau) w.col(j) = ((norm - tau) / norm) * q.col(j);
    }
    return w;
}

} // namespace nrpca
