#pragma once

// Synthetic ground-truth instances, recovery metrics, anomaly scoring and
// frame stacking.

#include "nrpca/matrix.hpp"
#include "nrpca/solver.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <string>
#include <tuple>
#include <vector>

namespace nrpca {

/// Seeded random source with a fully specified output stream.
///
/// Engine: std::mt19937_64 seeded with the 64-bit seed (its algorithm and
/// seeding are fixed by the C++ standard). Derived draws:
///   uniform()      (word >> 11) * 2^-53, in [0, 1)
///   below(n)       word % n, rejecting words >= 2^64 - (2^64 mod n)
///   normal()       Box-Muller: u1 = 1 - uniform(), u2 = uniform(),
///                  sqrt(-2 ln u1) * cos(2 pi u2); one normal per two words
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_word() { return engine_(); }

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    std::uint64_t below(std::uint64_t n) {
        detail::require(n > 0, "Rng::below: n must be positive");
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    (std::numeric_limits<std::uint64_t>::max() % n + 1) % n;
        std::uint64_t w;
        do {
            w = engine_();
        } while (w > limit);
        return w % n;
    }

    double normal() {
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Matrix filled row by row with standard normals.
    Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols) {
        Matrix m(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal();
        return m;
    }

    /// k distinct indices from [0, n) by a partial Fisher-Yates shuffle, in draw order.
    std::vector<std::uint64_t> sample_without_replacement(std::uint64_t n, std::uint64_t k) {
        detail::require(k <= n, "Rng::sample_without_replacement: k exceeds n");
        std::vector<std::uint64_t> idx(n);
        std::iota(idx.begin(), idx.end(), std::uint64_t{0});
        for (std::uint64_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + below(n - i)]);
        idx.resize(k);
        return idx;
    }

    /// Uniform on [-high, -low] U [low, high]: sign first, then magnitude.
    double signed_magnitude(double low, double high) {
        const bool negative = uniform() < 0.5;
        const double mag = low + (high - low) * uniform();
        return negative ? -mag : mag;
    }

private:
    std::mt19937_64 engine_;
};

enum class Corruption { Entrywise, Columnwise };

struct SyntheticSpec {
    Eigen::Index m = 100;
    Eigen::Index n = 100;
    Eigen::Index rank = 5;
    double sparsity = 0.05;
    double magnitude_low = 1.0;
    double magnitude_high = 10.0;
    Corruption corruption = Corruption::Entrywise;

    void validate() const {
        detail::require(m > 0 && n > 0, "SyntheticSpec: dimensions must be positive");
        detail::require(rank >= 1 && rank <= std::min(m, n), "SyntheticSpec: rank must lie in [1, min(m, n)]");
        detail::require(sparsity > 0.0 && sparsity < 1.0, "SyntheticSpec: sparsity must lie in (0, 1)");
        detail::require(magnitude_low > 0.0 && magnitude_low <= magnitude_high,
                        "SyntheticSpec: need 0 < magnitude_low <= magnitude_high");
    }
};

struct SyntheticInstance {
    Matrix x;
    Matrix l_star;
    Matrix s_star;
};

/// X = A B^T + S*. A (m x r) then B (n x r) are drawn row by row; corrupted
/// positions are sampled over row-major linear indices (Entrywise) or column
/// indices (Columnwise), and each corrupted entry gets a signed magnitude.
inline SyntheticInstance generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
    spec.validate();
    Rng rng(seed);
    const Matrix a = rng.normal_matrix(spec.m, spec.rank);
    const Matrix b = rng.normal_matrix(spec.n, spec.rank);
    SyntheticInstance inst;
    inst.l_star = a * b.transpose();
    inst.s_star = Matrix::Zero(spec.m, spec.n);

    if (spec.corruption == Corruption::Entrywise) {
        const auto total = static_cast<std::uint64_t>(spec.m * spec.n);
        const auto k = static_cast<std::uint64_t>(std::llround(spec.sparsity * static_cast<double>(total)));
        for (std::uint64_t lin : rng.sample_without_replacement(total, k)) {
            const auto i = static_cast<Eigen::Index>(lin / static_cast<std::uint64_t>(spec.n));
            const auto j = static_cast<Eigen::Index>(lin % static_cast<std::uint64_t>(spec.n));
            inst.s_star(i, j) = rng.signed_magnitude(spec.magnitude_low, spec.magnitude_high);
        }
    } else {
        const auto k = static_cast<std::uint64_t>(std::llround(spec.sparsity * static_cast<double>(spec.n)));
        for (std::uint64_t col : rng.sample_without_replacement(static_cast<std::uint64_t>(spec.n), k)) {
            for (Eigen::Index i = 0; i < spec.m; ++i) {
                inst.s_star(i, static_cast<Eigen::Index>(col)) =
                    rng.signed_magnitude(spec.magnitude_low, spec.magnitude_high);
            }
        }
    }
    inst.x = inst.l_star + inst.s_star;
    return inst;
}

/// Columns drawn from two random subspaces: `inliers` columns from one of
/// dimension `rank`, then `outliers` columns from another. Each subspace basis
/// and every coefficient are standard normal; outlier columns sit at the end.
inline Matrix generate_outlier_columns(Eigen::Index dim, Eigen::Index inliers, Eigen::Index outliers,
                                       Eigen::Index rank, std::uint64_t seed) {
    detail::require(dim > 0 && inliers > 0 && outliers >= 0 && rank >= 1 && rank <= dim,
                    "generate_outlier_columns: invalid sizes");
    Rng rng(seed);
    const Matrix base_in = rng.normal_matrix(dim, rank);
    const Matrix base_out = rng.normal_matrix(dim, rank);
    Matrix x(dim, inliers + outliers);
    x.leftCols(inliers) = base_in * rng.normal_matrix(rank, inliers);
    if (outliers > 0) x.rightCols(outliers) = base_out * rng.normal_matrix(rank, outliers);
    return x;
}

/// Count of singular values above rel_threshold * sigma_1 (0 for the zero matrix).
inline int rank_estimate(const Matrix& l, double rel_threshold = 1e-6) {
    detail::require(rel_threshold > 0.0 && rel_threshold < 1.0, "rank_estimate: threshold must lie in (0, 1)");
    if (l.size() == 0) return 0;
    return count_rank(svd(l).singulars, rel_threshold);
}

struct RecoveryErrors {
    double low_rank = 0.0;   // ||L - L*||_F / ||L*||_F
    double sparse = 0.0;     // ||S - S*||_F / max(1, ||S*||_F)
    double support_f1 = 0.0; // F1 of supp(S) vs supp(S*) at |entry| > 1e-6
};

inline RecoveryErrors recovery_errors(const Matrix& l, const Matrix& l_star, const Matrix& s, const Matrix& s_star) {
    detail::require_same_shape(l, l_star, "recovery_errors");
    detail::require_same_shape(s, s_star, "recovery_errors");
    detail::require_same_shape(l, s, "recovery_errors");
    constexpr double support_threshold = 1e-6;

    RecoveryErrors e;
    const double ln = l_star.norm();
    e.low_rank = ln > 0.0 ? (l - l_star).norm() / ln : (l - l_star).norm();
    e.sparse = (s - s_star).norm() / std::max(1.0, s_star.norm());

    long tp = 0, fp = 0, fn = 0;
    for (Eigen::Index j = 0; j < s.cols(); ++j) {
        for (Eigen::Index i = 0; i < s.rows(); ++i) {
            const bool est = std::abs(s(i, j)) > support_threshold;
            const bool truth = std::abs(s_star(i, j)) > support_threshold;
            tp += est && truth;
            fp += est && !truth;
            fn += !est && truth;
        }
    }
    // Both supports empty counts as perfect agreement.
    e.support_f1 = (tp + fp + fn == 0) ? 1.0 : 2.0 * tp / static_cast<double>(2 * tp + fp + fn);
    return e;
}

/// Per-column l2 norms of S.
inline std::vector<double> anomaly_scores(const Matrix& s) {
    std::vector<double> out(static_cast<std::size_t>(s.cols()));
    for (Eigen::Index j = 0; j < s.cols(); ++j) out[static_cast<std::size_t>(j)] = s.col(j).norm();
    return out;
}

/// Zero-based indices, ascending, whose score exceeds threshold.
inline std::vector<std::size_t> detect_anomalies(const std::vector<double>& scores, double threshold) {
    detail::require(threshold >= 0.0, "detect_anomalies: threshold must be nonnegative");
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < scores.size(); ++i)
        if (scores[i] > threshold) idx.push_back(i);
    return idx;
}

/// Each h x w frame becomes one column of length h*w, column-major within the frame.
inline Matrix stack_frames(const std::vector<Matrix>& frames) {
    detail::require(!frames.empty(), "stack_frames: no frames");
    const Eigen::Index h = frames.front().rows();
    const Eigen::Index w = frames.front().cols();
    Matrix out(h * w, static_cast<Eigen::Index>(frames.size()));
    for (std::size_t k = 0; k < frames.size(); ++k) {
        detail::require_same_shape(frames.front(), frames[k], "stack_frames");
        out.col(static_cast<Eigen::Index>(k)) = frames[k].reshaped();
    }
    return out;
}

inline std::vector<Matrix> unstack_frames(const Matrix& stacked, Eigen::Index h, Eigen::Index w) {
    detail::require(h > 0 && w > 0 && stacked.rows() == h * w,
                    "unstack_frames: column length does not match frame size");
    std::vector<Matrix> frames;
    frames.reserve(static_cast<std::size_t>(stacked.cols()));
    for (Eigen::Index k = 0; k < stacked.cols(); ++k) {
        frames.emplace_back(stacked.col(k).reshaped(h, w));
    }
    return frames;
}

} // namespace nrpca
