#pragma once

// Augmented-Lagrange-multiplier loop for
//
//   min_{L,S} F(L) + lambda * ||S||_l   s.t.  X = L + S
//
// where F is a spectral rank surrogate. Each outer iteration takes a spectral
// prox step in L, an exact shrinkage step in S, then a multiplier ascent step
// and geometric growth of the penalty mu.

#include "nrpca/matrix.hpp"
#include "nrpca/sparse.hpp"
#include "nrpca/surrogate.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace nrpca {

enum class LambdaPolicy {
    Fixed, // use SolverConfig::lambda as given
    Scale, // lambda = 1 / sqrt(max(m, n))
};

struct SolverConfig {
    double lambda = 1e-3;
    double mu0 = 1e-4;
    double rho = 1.1;
    double mu_max = 1e10;
    double tol = 1e-3;
    int max_outer = 500;
    RankSurrogate surrogate = RankSurrogate::gamma_norm(0.01);
    SparsePenalty penalty = SparsePenalty::EntrywiseL1;
    DcConfig dc{};
    LambdaPolicy lambda_policy = LambdaPolicy::Fixed;
    double rank_threshold = 1e-6; // relative cutoff for the reported numerical rank

    void validate() const {
        detail::require(lambda > 0.0, "SolverConfig: lambda must be positive");
        detail::require(mu0 > 0.0, "SolverConfig: mu0 must be positive");
        detail::require(rho > 1.0, "SolverConfig: rho must exceed 1");
        detail::require(mu_max >= mu0, "SolverConfig: mu_max must be >= mu0");
        detail::require(tol > 0.0, "SolverConfig: tol must be positive");
        detail::require(max_outer >= 1, "SolverConfig: max_outer must be >= 1");
        detail::require(!surrogate.is_gamma() || surrogate.gamma > 0.0,
                        "SolverConfig: gamma must be positive");
        detail::require(rank_threshold > 0.0 && rank_threshold < 1.0,
                        "SolverConfig: rank_threshold must lie in (0, 1)");
        dc.validate();
    }

    /// Copy with lambda fixed according to lambda_policy for an m x n input.
    SolverConfig resolved_for(Eigen::Index rows, Eigen::Index cols) const {
        SolverConfig c = *this;
        if (lambda_policy == LambdaPolicy::Scale) {
            c.lambda = 1.0 / std::sqrt(static_cast<double>(std::max(rows, cols)));
        }
        return c;
    }
};

struct SolverState {
    Matrix l;
    Matrix s;
    Matrix y;
    double mu = 0.0;
    int iter = 0;

    static SolverState initial(const Matrix& x, const SolverConfig& cfg) {
        return {Matrix::Zero(x.rows(), x.cols()), Matrix::Zero(x.rows(), x.cols()),
                Matrix::Zero(x.rows(), x.cols()), cfg.mu0, 0};
    }
};

struct IterationRecord {
    int iter = 0;
    double residual = 0.0;           // relative residual after the iteration
    double lagrangian = 0.0;         // L(L^{t+1}, S^{t+1}, Y^t, mu^t)
    double lagrangian_start = 0.0;   // L(L^t, S^t, Y^t, mu^t)
    double lagrangian_after_l = 0.0; // L(L^{t+1}, S^t, Y^t, mu^t)
    int rank_estimate = 0;
    double y_inf_norm = 0.0;      // max |Y^{t+1}_ij|
    double y_max_col_norm = 0.0;  // max_j ||Y^{t+1}_:j||_2
    int dc_iters = 0;
    double mu = 0.0;              // mu^t used in this iteration
    double s_change = 0.0;        // mu^t ||S^{t+1} - S^t||_F
};

struct KktResiduals {
    double primal = 0.0;
    double dual = 0.0;
};

struct SolverResult {
    Matrix l;
    Matrix s;
    Matrix y;
    int iterations = 0;
    bool converged = false;
    std::vector<IterationRecord> history;
    double elapsed_seconds = 0.0;
    KktResiduals kkt;
    SolverConfig config; // effective configuration (lambda resolved)
};

/// Invoked once per outer iteration with the state before and after it.
using ProgressCallback =
    std::function<void(const IterationRecord&, const SolverState& before, const SolverState& after)>;

/// Number of singular values above rel_threshold * sigma_1.
inline int count_rank(const Vector& singulars, double rel_threshold) {
    if (singulars.size() == 0) return 0;
    const double top = singulars.maxCoeff();
    if (!(top > 0.0)) return 0;
    int r = 0;
    for (Eigen::Index i = 0; i < singulars.size(); ++i) {
        if (singulars(i) > rel_threshold * top) ++r;
    }
    return r;
}

namespace detail {

inline void require_state_shape(const Matrix& x, const SolverState& st, const char* ctx) {
    require_same_shape(x, st.l, ctx);
    require_same_shape(x, st.s, ctx);
    require_same_shape(x, st.y, ctx);
    require(st.mu > 0.0, std::string(ctx) + ": mu must be positive");
}

// Lagrangian with F(L) supplied by the caller, avoiding an SVD when the
// singular values of L are already known.
inline double lagrangian_with(double f_l, const Matrix& x, const SolverState& st, const SolverConfig& cfg) {
    const Matrix r = st.l + st.s - x;
    return f_l + cfg.lambda * penalty_value(st.s, cfg.penalty) + (st.y.array() * r.array()).sum() +
           0.5 * st.mu * r.squaredNorm();
}

} // namespace detail

/// prox of F at X - S - Y/mu with parameter mu, including SVD diagnostics.
inline MatrixProx update_l_traced(const Matrix& x, const SolverState& st, const SolverConfig& cfg) {
    detail::require_state_shape(x, st, "update_l");
    return prox_matrix_traced(x - st.s - st.y / st.mu, st.mu, cfg.surrogate, cfg.dc);
}

inline Matrix update_l(const Matrix& x, const SolverState& st, const SolverConfig& cfg) {
    return update_l_traced(x, st, cfg).z;
}

/// Shrink X - L - Y/mu with threshold lambda/mu; st.l must already hold L^{t+1}.
inline Matrix update_s(const Matrix& x, const SolverState& st, const SolverConfig& cfg) {
    detail::require_state_shape(x, st, "update_s");
    return shrink(x - st.l - st.y / st.mu, cfg.lambda / st.mu, cfg.penalty);
}

/// (Y + mu (L + S - X), min(rho mu, mu_max)).
inline std::pair<Matrix, double> update_duals(const Matrix& x, const SolverState& st, const SolverConfig& cfg) {
    detail::require_state_shape(x, st, "update_duals");
    Matrix y = st.y + st.mu * (st.l - x + st.s);
    return {std::move(y), std::min(cfg.rho * st.mu, cfg.mu_max)};
}

/// F(L) + lambda ||S||_l + <Y, L + S - X> + (mu/2) ||L + S - X||_F^2.
inline double lagrangian(const Matrix& x, const SolverState& st, const SolverConfig& cfg) {
    detail::require_state_shape(x, st, "lagrangian");
    const double f_l = surrogate_value(svd(st.l).singulars, cfg.surrogate);
    return detail::lagrangian_with(f_l, x, st, cfg);
}

/// Primal feasibility ||L + S - X|| / max(1, ||X||) and stationarity
/// ||U diag(theta) V^T + Y|| / max(1, ||Y||), theta = f'(sigma(L)).
inline KktResiduals kkt_residuals(const Matrix& x, const SolverState& st, const SolverConfig& cfg) {
    detail::require_state_shape(x, st, "kkt_residuals");
    const SvdFactors f = svd(st.l);
    const Vector theta = surrogate_gradient(f.singulars, cfg.surrogate);
    const Matrix grad = f.u * theta.asDiagonal() * f.vt;
    return {(st.l + st.s - x).norm() / std::max(1.0, x.norm()),
            (grad + st.y).norm() / std::max(1.0, st.y.norm())};
}

/// Convex baseline: the same loop and stopping rule with the nuclear norm.
/// The lambda rule is explicit because the convex problem is usually run
/// with lambda = 1/sqrt(max(m, n)) rather than the nonconvex default.
inline SolverConfig nuclear_baseline(const SolverConfig& cfg, LambdaPolicy policy = LambdaPolicy::Scale) {
    SolverConfig c = cfg;
    c.surrogate = RankSurrogate::nuclear();
    c.lambda_policy = policy;
    return c;
}

/// Runs the outer loop from S = 0, Y = 0 until the relative residual drops
/// to cfg.tol or cfg.max_outer iterations elapse. Non-convergence is reported
/// through SolverResult::converged, not thrown.
inline SolverResult solve(const Matrix& x, const SolverConfig& config, const ProgressCallback& on_iteration = {}) {
    using clock = std::chrono::steady_clock;
    const auto started = clock::now();

    detail::require(x.size() > 0, "solve: empty input matrix");
    detail::require(x.allFinite(), "solve: input contains non-finite entries");
    const SolverConfig cfg = config.resolved_for(x.rows(), x.cols());
    cfg.validate();

    SolverResult res;
    res.config = cfg;
    SolverState st = SolverState::initial(x, cfg);
    double f_l = 0.0; // F(L^t); L^0 = 0

    for (int t = 0; t < cfg.max_outer; ++t) {
        SolverState before;
        if (on_iteration) before = st;

        IterationRecord rec;
        rec.iter = t;
        rec.mu = st.mu;
        rec.lagrangian_start = detail::lagrangian_with(f_l, x, st, cfg);

        MatrixProx lp;
        try {
            lp = update_l_traced(x, st, cfg);
        } catch (const NumericalError& e) {
            throw NumericalError("outer iteration " + std::to_string(t) + ": " + e.what());
        }
        st.l = std::move(lp.z);
        f_l = surrogate_value(lp.singulars, cfg.surrogate);
        rec.lagrangian_after_l = detail::lagrangian_with(f_l, x, st, cfg);
        rec.dc_iters = lp.max_dc_iterations;
        rec.rank_estimate = count_rank(lp.singulars, cfg.rank_threshold);

        Matrix s_next = update_s(x, st, cfg);
        rec.s_change = st.mu * (s_next - st.s).norm();
        st.s = std::move(s_next);
        rec.lagrangian = detail::lagrangian_with(f_l, x, st, cfg);

        auto [y_next, mu_next] = update_duals(x, st, cfg);
        st.y = std::move(y_next);
        st.mu = mu_next;
        st.iter = t + 1;

        rec.residual = relative_residual(x, st.l, st.s);
        rec.y_inf_norm = st.y.cwiseAbs().maxCoeff();
        rec.y_max_col_norm = st.y.colwise().norm().maxCoeff();
        res.history.push_back(rec);
        if (on_iteration) on_iteration(rec, before, st);

        if (rec.residual <= cfg.tol) {
            res.converged = true;
            break;
        }
    }

    res.iterations = st.iter;
    res.kkt = kkt_residuals(x, st, cfg);
    res.l = std::move(st.l);
    res.s = std::move(st.s);
    res.y = std::move(st.y);
    res.elapsed_seconds = std::chrono::duration<double>(clock::now() - started).count();
    return res;
}

} // namespace nrpca
