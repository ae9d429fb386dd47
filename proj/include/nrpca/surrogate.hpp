#pragma once

// Spectral rank surrogates and their proximal operators.
//
// The gamma-norm penalizes each singular value by (1+g)s/(g+s): it is 0 at
// s = 0, 1 at s = 1, and saturates at 1+g, so it tends to the rank as g -> 0
// and to the nuclear norm as g -> inf.

#include "nrpca/matrix.hpp"

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

namespace nrpca {

struct RankSurrogate {
    enum class Kind { Gamma, Nuclear };

    Kind kind = Kind::Gamma;
    double gamma = 0.01; // meaningful only for Kind::Gamma

    static RankSurrogate gamma_norm(double g) {
        detail::require(g > 0.0 && std::isfinite(g), "RankSurrogate: gamma must be positive");
        return {Kind::Gamma, g};
    }
    static RankSurrogate nuclear() { return {Kind::Nuclear, 0.0}; }

    bool is_gamma() const { return kind == Kind::Gamma; }

    /// Scalar penalty f(s) for s >= 0.
    double value(double s) const {
        if (kind == Kind::Nuclear) return s;
        return (1.0 + gamma) * s / (gamma + s);
    }

    /// f'(s); at s = 0 the gamma branch takes its limit (1+g)/g.
    double derivative(double s) const {
        if (kind == Kind::Nuclear) return 1.0;
        if (s == 0.0) return (1.0 + gamma) / gamma;
        const double d = gamma + s;
        return (1.0 + gamma) * gamma / (d * d);
    }

    std::string name() const { return kind == Kind::Nuclear ? "nuclear" : "gamma"; }
};

/// Inner-loop controls for the DC iteration.
struct DcConfig {
    int max_inner = 30;
    double tol = 1e-10;

    void validate() const {
        detail::require(max_inner >= 1, "DcConfig: max_inner must be >= 1");
        detail::require(tol > 0.0, "DcConfig: tol must be positive");
    }
};

namespace detail {

inline void require_nonnegative(const Vector& sigma, const char* ctx) {
    for (Eigen::Index i = 0; i < sigma.size(); ++i) {
        if (!(sigma(i) >= 0.0)) throw std::invalid_argument(std::string(ctx) + ": negative singular value");
    }
}

/// f(s) + (mu/2)(s - a)^2, the per-component prox objective.
inline double prox_objective(double s, double a, double mu, const RankSurrogate& sur) {
    return sur.value(s) + 0.5 * mu * (s - a) * (s - a);
}

/// One linearize-and-minimize DC step: (a - f'(s)/mu)_+.
inline double dc_step(double s, double a, double mu, const RankSurrogate& sur) {
    return std::max(a - sur.derivative(s) / mu, 0.0);
}

struct ScalarProx {
    double value;
    int iterations;
};

// The DC sequence from s0 = a decreases monotonically to the largest
// stationary point, which is the only interior local minimum because the
// objective is concave below an inflection point and convex above it. The
// remaining candidate is the boundary s = 0; keep whichever is lower.
inline ScalarProx prox_scalar(double a, double mu, const RankSurrogate& sur, const DcConfig& cfg) {
    if (a <= 0.0) return {0.0, 0};
    if (sur.kind == RankSurrogate::Kind::Nuclear) return {std::max(a - 1.0 / mu, 0.0), 0};

    double s = a;
    int k = 0;
    while (k < cfg.max_inner) {
        const double next = dc_step(s, a, mu, sur);
        const double change = std::abs(next - s);
        s = next;
        ++k;
        if (change <= cfg.tol) break;
    }
    if (s > 0.0 && prox_objective(0.0, a, mu, sur) < prox_objective(s, a, mu, sur)) s = 0.0;
    return {s, k};
}

} // namespace detail

/// Sum of f over the singular values.
inline double surrogate_value(const Vector& sigma, const RankSurrogate& sur) {
    detail::require_nonnegative(sigma, "surrogate_value");
    double total = 0.0;
    for (Eigen::Index i = 0; i < sigma.size(); ++i) total += sur.value(sigma(i));
    return total;
}

inline Vector surrogate_gradient(const Vector& sigma, const RankSurrogate& sur) {
    detail::require_nonnegative(sigma, "surrogate_gradient");
    Vector g(sigma.size());
    for (Eigen::Index i = 0; i < sigma.size(); ++i) g(i) = sur.derivative(sigma(i));
    return g;
}

struct VectorProx {
    Vector sigma;
    int max_dc_iterations = 0; // largest inner iteration count over components
};

inline VectorProx prox_vector_traced(const Vector& sigma_a, double mu, const RankSurrogate& sur,
                                     const DcConfig& cfg) {
    detail::require(mu > 0.0, "prox_vector: mu must be positive");
    detail::require_nonnegative(sigma_a, "prox_vector");
    cfg.validate();
    VectorProx out{Vector(sigma_a.size()), 0};
    for (Eigen::Index i = 0; i < sigma_a.size(); ++i) {
        const auto r = detail::prox_scalar(sigma_a(i), mu, sur, cfg);
        out.sigma(i) = r.value;
        out.max_dc_iterations = std::max(out.max_dc_iterations, r.iterations);
    }
    return out;
}

/// argmin_{s >= 0} sum f(s_i) + (mu/2)||s - sigma_a||^2, componentwise.
inline Vector prox_vector(const Vector& sigma_a, double mu, const RankSurrogate& sur,
                          const DcConfig& cfg = {}) {
    return prox_vector_traced(sigma_a, mu, sur, cfg).sigma;
}

struct MatrixProx {
    Matrix z;
    Vector singulars; // singular values of z, nonincreasing
    int max_dc_iterations = 0;
};

inline MatrixProx prox_matrix_traced(const Matrix& a, double mu, const RankSurrogate& sur,
                                     const DcConfig& cfg) {
    detail::require(mu > 0.0, "prox_matrix: mu must be positive");
    SvdFactors f = svd(a);
    auto p = prox_vector_traced(f.singulars, mu, sur, cfg);
    // Shrinkage is monotone in the input, so the order is preserved.
    f.singulars = p.sigma;
    return {reconstruct(f), std::move(p.sigma), p.max_dc_iterations};
}

/// argmin_Z F(Z) + (mu/2)||Z - A||_F^2 for the unitarily invariant F = f o sigma.
inline Matrix prox_matrix(const Matrix& a, double mu, const RankSurrogate& sur, const DcConfig& cfg = {}) {
    return prox_matrix_traced(a, mu, sur, cfg).z;
}

/// Tabulates (s, f(s)) over a grid.
inline std::vector<std::pair<double, double>> rank_curve(const RankSurrogate& sur,
                                                         const std::vector<double>& grid) {
    std::vector<std::pair<double, double>> out;
    out.reserve(grid.size());
    for (double s : grid) {
        detail::require(s >= 0.0, "rank_curve: grid values must be nonnegative");
        out.emplace_back(s, sur.value(s));
    }
    return out;
}

} // namespace nrpca
