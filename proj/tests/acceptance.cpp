// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include "nrpca/io.hpp"
#include "nrpca/problems.hpp"
#include "nrpca/solver.hpp"

#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using nrpca::Matrix;
using nrpca::Vector;

namespace {

// Tolerances and budgets.
constexpr double kProxTol = 1e-6;
constexpr double kProxBudget = 10.0;
constexpr double kShrinkTol = 1e-8;
constexpr double kShrinkBudget = 5.0;
constexpr double kGradTol = 1e-5;
constexpr double kGradBudget = 1.0;
constexpr double kRankLawTol = 1e-3;
constexpr double kNuclearLawTol = 1e-4;
constexpr double kRecoveryTol = 1e-2;
constexpr double kResidualTol = 1e-3;
constexpr double kSolveBudget = 60.0;
constexpr double kMultiplierSlack = 1e-12;
constexpr double kDescentSlack = 1e-8;
constexpr double kIdentityTol = 1e-12;
constexpr double kPrimalKktTol = 1e-3;
constexpr double kAnomalyBudget = 30.0;
constexpr int kAnomalyTop = 14;

const std::uint64_t kSeeds[] = {1, 2, 3, 4, 5};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

Outcome prox_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 gen(101);
    const double gammas[] = {0.01, 0.1, 1.0};
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double a = oracle::uniform(gen, 0.0, 10.0);
        const double mu = oracle::uniform(gen, 0.1, 100.0);
        const double g = gammas[i % 3];
        const auto obj = [&](double s) { return oracle::gamma_penalty(s, g) + 0.5 * mu * (s - a) * (s - a); };
        const oracle::GridMin best = oracle::grid_min_refined(obj, 0.0, a, 1e-3, 1e-6);
        Vector in(1);
        in << a;
        const double s = nrpca::prox_vector(in, mu, nrpca::RankSurrogate::gamma_norm(g))(0);
        worst = std::max(worst, obj(s) - best.value);
    }
    const double t = seconds_since(t0);
    return {worst <= kProxTol && t < kProxBudget,
            fmt("worst objective gap %.3g", worst) + fmt(", %.2f s", t)};
}

Outcome shrink_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 gen(102);
    double worst = 0.0;
    double worst_gap = 0.0; // objective excess over a grid scan, a second opinion
    for (int trial = 0; trial < 100; ++trial) {
        const Matrix q = oracle::random_matrix(gen, 5, 5) * 3.0;
        const double tau = oracle::uniform(gen, 0.05, 3.0);
        const Matrix w1 = nrpca::shrink(q, tau, nrpca::SparsePenalty::EntrywiseL1);
        for (Eigen::Index i = 0; i < q.size(); ++i) {
            const double qi = q.data()[i];
            const auto obj = [&](double x) { return tau * std::abs(x) + 0.5 * (x - qi) * (x - qi); };
            const auto d = [&](double x) { return tau * (x >= 0.0 ? 1.0 : -1.0) + x - qi; };
            worst = std::max(worst, std::abs(w1.data()[i] - oracle::convex_argmin(d, -std::abs(qi), std::abs(qi))));
            const auto g = oracle::grid_min_refined(obj, -std::abs(qi), std::abs(qi), 1e-2, 1e-6);
            worst_gap = std::max(worst_gap, obj(w1.data()[i]) - g.value);
        }
        // Per column the minimizer is c * q_col with c in [0, 1].
        const Matrix w21 = nrpca::shrink(q, tau, nrpca::SparsePenalty::ColumnwiseL21);
        for (Eigen::Index j = 0; j < q.cols(); ++j) {
            const double nq = q.col(j).norm();
            const auto obj = [&](double c) { return tau * c * nq + 0.5 * (c - 1) * (c - 1) * nq * nq; };
            const auto d = [&](double c) { return tau * nq + (c - 1) * nq * nq; };
            const double c = oracle::convex_argmin(d, 0.0, 1.0);
            worst = std::max(worst, (w21.col(j) - c * q.col(j)).cwiseAbs().maxCoeff());
            const auto g = oracle::grid_min_refined(obj, 0.0, 1.0, 1e-3, 1e-7);
            worst_gap = std::max(worst_gap, obj(w21.col(j).norm() / nq) - g.value);
        }
    }
    const double t = seconds_since(t0);
    return {worst <= kShrinkTol && worst_gap <= 1e-12 && t < kShrinkBudget,
            fmt("worst deviation %.3g", worst) + fmt(", worst grid gap %.3g", worst_gap) + fmt(", %.2f s", t)};
}

Outcome gradient_check() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 gen(103);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double g = i % 2 ? 1.0 : 0.01;
        const double s = oracle::uniform(gen, 0.1, 20.0);
        Vector v(1);
        v << s;
        const double analytic = nrpca::surrogate_gradient(v, nrpca::RankSurrogate::gamma_norm(g))(0);
        const double fd = oracle::central_difference([&](double x) { return oracle::gamma_penalty(x, g); }, s, 1e-5 * s);
        worst = std::max(worst, std::abs(analytic - fd) / std::abs(fd));
    }
    const double t = seconds_since(t0);
    return {worst <= kGradTol && t < kGradBudget, fmt("worst relative error %.3g", worst) + fmt(", %.3f s", t)};
}

Outcome limit_laws() {
    std::mt19937_64 gen(104);
    double rank_err = 0.0;
    double nuc_err = 0.0;
    bool soft_exact = true;
    for (int i = 0; i < 1000; ++i) {
        Vector binary(8);
        for (Eigen::Index k = 0; k < 8; ++k) binary(k) = oracle::uniform(gen, 0.0, 1.0) < 0.5 ? 0.0 : 1.0;
        rank_err = std::max(rank_err, std::abs(nrpca::surrogate_value(binary, nrpca::RankSurrogate::gamma_norm(1e-6)) -
                                               binary.sum()));

        Vector sigma(8);
        for (Eigen::Index k = 0; k < 8; ++k) sigma(k) = oracle::uniform(gen, 0.0, 10.0);
        const double nuc = sigma.sum();
        nuc_err = std::max(nuc_err,
                           std::abs(nrpca::surrogate_value(sigma, nrpca::RankSurrogate::gamma_norm(1e6)) - nuc) / nuc);

        const double mu = oracle::uniform(gen, 0.1, 100.0);
        const Vector p = nrpca::prox_vector(sigma, mu, nrpca::RankSurrogate::nuclear());
        for (Eigen::Index k = 0; k < 8; ++k) soft_exact = soft_exact && p(k) == std::max(sigma(k) - 1.0 / mu, 0.0);
    }
    return {rank_err <= kRankLawTol && nuc_err <= kNuclearLawTol && soft_exact,
            fmt("rank error %.3g", rank_err) + fmt(", nuclear relative error %.3g", nuc_err) +
                (soft_exact ? ", soft threshold exact" : ", soft threshold mismatch")};
}

struct SeedRun {
    nrpca::SyntheticInstance inst;
    nrpca::SolverResult gamma;
    double gamma_seconds = 0.0;
    bool multiplier_ok = true;
    double descent_violation = 0.0;
    double identity_error = 0.0;
};

nrpca::SyntheticSpec recovery_spec() { return {200, 200, 5, 0.05, 1.0, 10.0, nrpca::Corruption::Entrywise}; }

// Tracks the per-iteration diagnostics shared by criteria 7 and 8.
nrpca::ProgressCallback diagnostics(const Matrix& x, double lambda, nrpca::SparsePenalty penalty, SeedRun& out) {
    return [&x, lambda, penalty, &out](const nrpca::IterationRecord& rec, const nrpca::SolverState& before,
                                        const nrpca::SolverState& after) {
        const double bound = penalty == nrpca::SparsePenalty::EntrywiseL1 ? rec.y_inf_norm : rec.y_max_col_norm;
        out.multiplier_ok = out.multiplier_ok && bound <= lambda + kMultiplierSlack;
        out.descent_violation = std::max({out.descent_violation, rec.lagrangian_after_l - rec.lagrangian_start,
                                          rec.lagrangian - rec.lagrangian_after_l});
        const Matrix lhs = after.l + after.s - x;
        const Matrix rhs = (after.y - before.y) / before.mu;
        out.identity_error = std::max(out.identity_error, (lhs - rhs).cwiseAbs().maxCoeff());
    };
}

std::vector<SeedRun> run_recovery_seeds() {
    std::vector<SeedRun> runs;
    for (std::uint64_t seed : kSeeds) {
        SeedRun r;
        r.inst = nrpca::generate_synthetic(recovery_spec(), seed);
        nrpca::SolverConfig cfg;
        cfg.mu0 = 1e-4;
        const auto t0 = std::chrono::steady_clock::now();
        r.gamma = nrpca::solve(r.inst.x, cfg, diagnostics(r.inst.x, cfg.lambda, cfg.penalty, r));
        r.gamma_seconds = seconds_since(t0);
        runs.push_back(std::move(r));
    }
    return runs;
}

Outcome exact_recovery(const std::vector<SeedRun>& runs) {
    bool ok = true;
    std::string detail;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const auto& r = runs[i];
        const double res = r.gamma.history.back().residual;
        const double err = (r.gamma.l - r.inst.l_star).norm() / r.inst.l_star.norm();
        const int rank = nrpca::rank_estimate(r.gamma.l);
        const bool pass = r.gamma.converged && res <= kResidualTol && err <= kRecoveryTol && rank == 5 &&
                          r.gamma_seconds < kSolveBudget;
        ok = ok && pass;
        char buf[160];
        std::snprintf(buf, sizeof buf, "%sseed %llu: rank %d err %.2e res %.2e %d it %.2f s", i ? "; " : "",
                      static_cast<unsigned long long>(kSeeds[i]), rank, err, res, r.gamma.iterations,
                      r.gamma_seconds);
        detail += buf;
    }
    return {ok, detail};
}

Outcome rank_advantage(const std::vector<SeedRun>& runs) {
    int strict = 0;
    bool never_below = true;
    std::string detail;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const auto& r = runs[i];
        const auto base = nrpca::solve(r.inst.x, nrpca::nuclear_baseline(r.gamma.config));
        const int rg = nrpca::rank_estimate(r.gamma.l);
        const int rn = nrpca::rank_estimate(base.l);
        never_below = never_below && rn >= rg;
        strict += rn > rg;
        char buf[96];
        std::snprintf(buf, sizeof buf, "%sseed %llu: nuclear %d vs gamma %d", i ? "; " : "",
                      static_cast<unsigned long long>(kSeeds[i]), rn, rg);
        detail += buf;
    }
    detail += "; strict on " + std::to_string(strict) + "/5";
    return {never_below && strict >= 4, detail};
}

Outcome multiplier_bound(const std::vector<SeedRun>& runs) {
    bool ok = true;
    for (const auto& r : runs) ok = ok && r.multiplier_ok;
    bool ok21 = true;
    for (std::uint64_t seed : kSeeds) {
        SeedRun r;
        r.inst = nrpca::generate_synthetic(recovery_spec(), seed);
        nrpca::SolverConfig cfg;
        cfg.penalty = nrpca::SparsePenalty::ColumnwiseL21;
        nrpca::solve(r.inst.x, cfg, diagnostics(r.inst.x, cfg.lambda, cfg.penalty, r));
        ok21 = ok21 && r.multiplier_ok;
    }
    return {ok && ok21, std::string("l1 ") + (ok ? "bounded" : "violated") + ", l21 " + (ok21 ? "bounded" : "violated")};
}

Outcome descent_diagnostics(const std::vector<SeedRun>& runs) {
    double descent = 0.0;
    double identity = 0.0;
    double primal = 0.0;
    bool s_change_ok = true;
    bool dual_reported = true;
    for (const auto& r : runs) {
        descent = std::max(descent, r.descent_violation);
        identity = std::max(identity, r.identity_error);
        primal = std::max(primal, r.gamma.kkt.primal);
        const auto& h = r.gamma.history;
        const std::size_t n = h.size();
        const std::size_t start = n - std::max<std::size_t>(2, (n + 3) / 4);
        for (std::size_t k = start + 1; k < n; ++k) s_change_ok = s_change_ok && h[k].s_change < h[k - 1].s_change;
        const auto report = nrpca::make_report(r.gamma, r.inst.x);
        dual_reported = dual_reported && report.contains("kkt") && report["kkt"].contains("dual") &&
                        report["kkt"]["dual"].is_number();
    }
    const bool ok = descent <= kDescentSlack && identity <= kIdentityTol && s_change_ok && primal <= kPrimalKktTol &&
                    dual_reported;
    return {ok, fmt("max descent violation %.3g", descent) + fmt(", identity error %.3g", identity) +
                    fmt(", max primal KKT %.3g", primal) +
                    (s_change_ok ? ", s_change decreasing" : ", s_change not decreasing") +
                    (dual_reported ? ", dual reported" : ", dual missing")};
}

Outcome anomaly_detection() {
    bool ok = true;
    std::string detail;
    for (std::size_t i = 0; i < std::size(kSeeds); ++i) {
        const Matrix x = nrpca::generate_outlier_columns(256, 190, 10, 3, kSeeds[i]);
        nrpca::SolverConfig cfg;
        cfg.penalty = nrpca::SparsePenalty::ColumnwiseL21;
        const auto t0 = std::chrono::steady_clock::now();
        const auto res = nrpca::solve(x, cfg);
        const double t = seconds_since(t0);
        const auto scores = nrpca::anomaly_scores(res.s);
        std::vector<std::size_t> order(scores.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
        int hits = 0;
        for (int k = 0; k < kAnomalyTop; ++k) hits += order[static_cast<std::size_t>(k)] >= 190;
        ok = ok && hits == 10 && t < kAnomalyBudget;
        char buf[96];
        std::snprintf(buf, sizeof buf, "%sseed %llu: %d/10 in top %d, %.2f s", i ? "; " : "",
                      static_cast<unsigned long long>(kSeeds[i]), hits, kAnomalyTop, t);
        detail += buf;
    }
    return {ok, detail};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome cli_determinism() {
    const fs::path dir = fs::temp_directory_path() / "nrpca_acceptance_cli";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string cli = NRPCA_CLI_PATH;
    const auto sh = [](const std::string& cmd) { return std::system((cmd + " > /dev/null 2>&1").c_str()); };

    bool ok = true;
    for (const char* run : {"a", "b"}) {
        const fs::path d = dir / run;
        ok = ok && sh(cli + " synth --m 80 --n 60 --rank 4 --seed 17 -o " + (d / "data").string()) == 0;
        ok = ok && sh(cli + " decompose -i " + (d / "data" / "X.csv").string() + " -o " + (d / "out").string() +
                      " --gamma 0.05 --rho 1.2") == 0;
    }
    if (!ok) return {false, "CLI invocation failed"};
    const bool l_same = slurp(dir / "a/out/L.csv") == slurp(dir / "b/out/L.csv");
    const bool s_same = slurp(dir / "a/out/S.csv") == slurp(dir / "b/out/S.csv");
    const bool h_same = nrpca::read_json(dir / "a/out/report.json")["history"] ==
                        nrpca::read_json(dir / "b/out/report.json")["history"];
    fs::remove_all(dir);
    return {l_same && s_same && h_same, std::string("L.csv ") + (l_same ? "identical" : "differs") + ", S.csv " +
                                            (s_same ? "identical" : "differs") + ", history " +
                                            (h_same ? "identical" : "differs")};
}

} // namespace

int main() {
    int failures = 0;
    const auto report = [&](int id, const char* name, const Outcome& o) {
        std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
        std::fflush(stdout);
        failures += !o.pass;
    };
    const auto guarded = [](const std::function<Outcome()>& f) -> Outcome {
        try {
            return f();
        } catch (const std::exception& e) {
            return {false, std::string("exception: ") + e.what()};
        }
    };

    report(1, "prox oracle equivalence", guarded(prox_oracle));
    report(2, "shrinkage exactness", guarded(shrink_oracle));
    report(3, "gradient correctness", guarded(gradient_check));
    report(4, "gamma-norm limit laws", guarded(limit_laws));

    std::vector<SeedRun> runs;
    Outcome setup{true, ""};
    try {
        runs = run_recovery_seeds();
    } catch (const std::exception& e) {
        setup = {false, std::string("exception: ") + e.what()};
    }
    const auto needs_runs = [&](const std::function<Outcome()>& f) { return setup.pass ? guarded(f) : setup; };
    report(5, "exact recovery", needs_runs([&] { return exact_recovery(runs); }));
    report(6, "rank advantage over nuclear baseline", needs_runs([&] { return rank_advantage(runs); }));
    report(7, "multiplier bound", needs_runs([&] { return multiplier_bound(runs); }));
    report(8, "block descent and feasibility", needs_runs([&] { return descent_diagnostics(runs); }));
    report(9, "anomaly detection", guarded(anomaly_detection));
    report(10, "CLI determinism", guarded(cli_determinism));

    std::printf("%d/10 criteria passed\n", 10 - failures);
    return failures == 0 ? 0 : 1;
}
