#pragma once

// Command-line front end: decompose | synth | anomaly | curve | bench | stack.
//
// Exit codes: 0 success, 2 usage error, 3 input error, 4 solver did not
// converge (outputs are still written), 1 numerical failure.

#include "nrpca/io.hpp"
#include "nrpca/problems.hpp"
#include "nrpca/solver.hpp"
#include "nrpca/surrogate.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace nrpca::cli {

enum ExitCode : int {
    kOk = 0,
    kNumerical = 1,
    kUsage = 2,
    kInput = 3,
    kNotConverged = 4,
};

namespace fs = std::filesystem;

/// Solver flags shared by decompose, anomaly and bench. Unset flags fall back
/// to --params (a config object or a whole report.json), then to defaults.
struct SolverFlags {
    std::optional<double> lambda, mu0, rho, gamma, tol, mu_max;
    std::optional<int> max_outer;
    std::optional<std::string> penalty, surrogate, lambda_policy;
    std::string params_file;

    void attach(CLI::App& app) {
        app.add_option("--lambda", lambda, "Sparsity weight (default 1e-3)");
        app.add_option("--mu0", mu0, "Initial penalty (default 1e-4)");
        app.add_option("--rho", rho, "Penalty growth factor (default 1.1)");
        app.add_option("--mu-max", mu_max, "Penalty cap (default 1e10)");
        app.add_option("--gamma", gamma, "Gamma-norm parameter (default 0.01)");
        app.add_option("--tol", tol, "Relative residual stopping tolerance (default 1e-3)");
        app.add_option("--max-outer", max_outer, "Maximum outer iterations (default 500)");
        app.add_option("--penalty", penalty, "Sparsity penalty")->check(CLI::IsMember({"l1", "l21"}));
        app.add_option("--surrogate", surrogate, "Rank surrogate")->check(CLI::IsMember({"gamma", "nuclear"}));
        app.add_option("--lambda-policy", lambda_policy, "fixed: use --lambda; scale: 1/sqrt(max(m,n))")
            ->check(CLI::IsMember({"fixed", "scale"}));
        app.add_option("--params", params_file, "JSON config or report.json whose params seed the defaults")
            ->check(CLI::ExistingFile);
    }

    SolverConfig build(const std::string& default_penalty = "l1") const {
        nlohmann::json j = nlohmann::json::object();
        j["penalty"] = default_penalty;
        if (!params_file.empty()) {
            nlohmann::json loaded = read_json(params_file);
            if (loaded.contains("params")) loaded = loaded["params"];
            if (!loaded.is_object()) throw IoError(params_file + ": expected a JSON object");
            j.update(loaded);
        }
        if (lambda) j["lambda"] = *lambda;
        if (mu0) j["mu0"] = *mu0;
        if (rho) j["rho"] = *rho;
        if (mu_max) j["mu_max"] = *mu_max;
        if (gamma) j["gamma"] = *gamma;
        if (tol) j["tol"] = *tol;
        if (max_outer) j["max_outer"] = *max_outer;
        if (penalty) j["penalty"] = *penalty;
        if (surrogate) j["surrogate"] = *surrogate;
        if (lambda_policy) j["lambda_policy"] = *lambda_policy;
        SolverConfig c = config_from_json(j);
        c.validate();
        return c;
    }
};

struct SyntheticFlags {
    Eigen::Index m = 100, n = 100, rank = 5;
    double sparsity = 0.05, low = 1.0, high = 10.0;
    std::string corruption = "entrywise";
    std::uint64_t seed = 1;

    void attach(CLI::App& app) {
        app.add_option("--m", m, "Rows")->check(CLI::PositiveNumber);
        app.add_option("--n", n, "Columns")->check(CLI::PositiveNumber);
        app.add_option("--rank", rank, "Rank of the low-rank part")->check(CLI::PositiveNumber);
        app.add_option("--sparsity", sparsity, "Fraction of corrupted entries (or columns)");
        app.add_option("--low", low, "Smallest corruption magnitude");
        app.add_option("--high", high, "Largest corruption magnitude");
        app.add_option("--corruption", corruption)->check(CLI::IsMember({"entrywise", "columnwise"}));
        app.add_option("--seed", seed, "Random seed");
    }

    SyntheticSpec spec() const {
        SyntheticSpec s{m, n, rank, sparsity, low, high,
                        corruption == "columnwise" ? Corruption::Columnwise : Corruption::Entrywise};
        s.validate();
        return s;
    }

    nlohmann::json echo() const {
        return {{"m", m},       {"n", n},         {"rank", rank},           {"sparsity", sparsity},
                {"low", low},   {"high", high},   {"corruption", corruption}, {"seed", seed}};
    }
};

inline fs::path prepare_dir(const std::string& dir) {
    fs::path p(dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
    return p;
}

inline void write_scores_csv(const fs::path& path, const std::vector<double>& scores) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    for (double s : scores) out << detail::format_double(s) << '\n';
}

/// Sorted *.pgm files of a directory.
inline std::vector<fs::path> list_frames(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw IoError(dir.string() + " is not a directory");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ".pgm") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw IoError("no .pgm frames in " + dir.string());
    return files;
}

inline nlohmann::json bench_entry(const SolverResult& r, const Matrix& x, const SyntheticInstance* truth) {
    nlohmann::json j = {
        {"params", to_json(r.config)},
        {"rank_estimate", rank_estimate(r.l, r.config.rank_threshold)},
        {"final_residual", relative_residual(x, r.l, r.s)},
        {"iterations", r.iterations},
        {"converged", r.converged},
        {"elapsed_seconds", r.elapsed_seconds},
        {"kkt", {{"primal", r.kkt.primal}, {"dual", r.kkt.dual}}},
    };
    if (truth) {
        const auto e = recovery_errors(r.l, truth->l_star, r.s, truth->s_star);
        j["recovery"] = {{"low_rank", e.low_rank}, {"sparse", e.sparse}, {"support_f1", e.support_f1}};
    }
    return j;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Robust PCA with a nonconvex gamma-norm rank surrogate", "nrpca"};
    app.require_subcommand(1);

    // decompose
    auto* decompose = app.add_subcommand("decompose", "Split X.csv into low-rank L and sparse S");
    std::string input, out_dir = ".";
    SolverFlags dflags;
    decompose->add_option("--input,-i", input, "Input matrix CSV")->required();
    decompose->add_option("--out-dir,-o", out_dir, "Output directory");
    dflags.attach(*decompose);

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a low-rank + sparse instance with ground truth");
    SyntheticFlags sflags;
    std::string synth_dir = ".";
    sflags.attach(*synth);
    synth->add_option("--out-dir,-o", synth_dir, "Output directory");

    // anomaly
    auto* anomaly = app.add_subcommand("anomaly", "Decompose, then score columns of S by l2 norm");
    std::string a_input, a_dir = ".";
    double threshold = 0.0;
    SolverFlags aflags;
    anomaly->add_option("--input,-i", a_input, "Input matrix CSV (one sample per column)")->required();
    anomaly->add_option("--out-dir,-o", a_dir, "Output directory");
    anomaly->add_option("--threshold", threshold, "Flag columns whose score exceeds this")
        ->check(CLI::NonNegativeNumber);
    aflags.attach(*anomaly);

    // curve
    auto* curve = app.add_subcommand("curve", "Tabulate surrogate penalties f(sigma) over a grid");
    std::vector<double> gammas;
    bool with_nuclear = false;
    std::vector<double> grid;
    double grid_max = 10.0;
    int points = 1001;
    std::string curve_out;
    curve->add_option("--gamma", gammas, "Gamma values, one column each (repeatable)");
    curve->add_flag("--nuclear", with_nuclear, "Add a nuclear-norm column");
    curve->add_option("--grid", grid, "Explicit sigma grid (overrides --max/--points)");
    curve->add_option("--max", grid_max, "Grid upper end")->check(CLI::NonNegativeNumber);
    curve->add_option("--points", points, "Grid size")->check(CLI::Range(2, 10000000));
    curve->add_option("--output,-o", curve_out, "Output CSV (stdout if omitted)");

    // bench
    auto* bench = app.add_subcommand("bench", "Compare the gamma-norm solver with the nuclear-norm baseline");
    std::string b_input, b_out = "bench.json", baseline_policy = "scale";
    SolverFlags bflags;
    SyntheticFlags bsynth;
    bench->add_option("--input,-i", b_input, "Input matrix CSV (otherwise a synthetic instance)");
    bench->add_option("--output,-o", b_out, "Comparison report path");
    bench->add_option("--baseline-lambda-policy", baseline_policy, "Lambda rule for the nuclear baseline")
        ->check(CLI::IsMember({"fixed", "scale"}));
    bflags.attach(*bench);
    bsynth.attach(*bench);

    // stack
    auto* stack = app.add_subcommand("stack", "Stack a directory of PGM frames into one CSV matrix");
    std::string frames_dir, stack_out = "X.csv";
    stack->add_option("--input-dir,-i", frames_dir, "Directory of .pgm frames (sorted by name)")->required();
    stack->add_option("--output,-o", stack_out, "Output CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*decompose) {
            const SolverConfig cfg = dflags.build("l1");
            const Matrix x = read_matrix_csv(input);
            const SolverResult r = solve(x, cfg);
            const fs::path dir = prepare_dir(out_dir);
            write_matrix_csv(dir / "L.csv", r.l);
            write_matrix_csv(dir / "S.csv", r.s);
            const auto report = make_report(r, x);
            write_json(dir / "report.json", report);
            out << "iterations " << r.iterations << ", rank " << report["rank_estimate"].get<int>()
                << ", residual " << report["final_residual"].get<double>()
                << (r.converged ? "" : " (not converged)") << '\n';
            return r.converged ? kOk : kNotConverged;
        }
        if (*synth) {
            const auto inst = generate_synthetic(sflags.spec(), sflags.seed);
            const fs::path dir = prepare_dir(synth_dir);
            write_matrix_csv(dir / "X.csv", inst.x);
            write_matrix_csv(dir / "L_star.csv", inst.l_star);
            write_matrix_csv(dir / "S_star.csv", inst.s_star);
            write_json(dir / "spec.json", sflags.echo());
            return kOk;
        }
        if (*anomaly) {
            const SolverConfig cfg = aflags.build("l21");
            const Matrix x = read_matrix_csv(a_input);
            const SolverResult r = solve(x, cfg);
            const auto scores = anomaly_scores(r.s);
            const auto flagged = detect_anomalies(scores, threshold);
            const fs::path dir = prepare_dir(a_dir);
            write_matrix_csv(dir / "L.csv", r.l);
            write_matrix_csv(dir / "S.csv", r.s);
            write_scores_csv(dir / "scores.csv", scores);
            {
                std::ofstream f(dir / "anomalies.csv", std::ios::binary);
                if (!f) throw IoError("cannot write " + (dir / "anomalies.csv").string());
                for (auto i : flagged) f << i << '\n';
            }
            auto report = make_report(r, x);
            report["threshold"] = threshold;
            report["anomalies"] = flagged;
            write_json(dir / "report.json", report);
            out << flagged.size() << " of " << scores.size() << " columns flagged\n";
            return r.converged ? kOk : kNotConverged;
        }
        if (*curve) {
            if (grid.empty()) {
                for (int i = 0; i < points; ++i) grid.push_back(grid_max * i / (points - 1));
            }
            std::vector<RankSurrogate> surrogates;
            for (double g : gammas) surrogates.push_back(RankSurrogate::gamma_norm(g));
            if (with_nuclear) surrogates.push_back(RankSurrogate::nuclear());
            if (surrogates.empty()) surrogates.push_back(RankSurrogate::gamma_norm(0.01));

            Matrix table(static_cast<Eigen::Index>(grid.size()), static_cast<Eigen::Index>(surrogates.size() + 1));
            for (std::size_t k = 0; k < surrogates.size(); ++k) {
                const auto pts = rank_curve(surrogates[k], grid);
                for (std::size_t i = 0; i < pts.size(); ++i) {
                    table(static_cast<Eigen::Index>(i), 0) = pts[i].first;
                    table(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k + 1)) = pts[i].second;
                }
            }
            if (curve_out.empty()) {
                write_matrix_csv(out, table);
            } else {
                write_matrix_csv(curve_out, table);
            }
            return kOk;
        }
        if (*bench) {
            const SolverConfig cfg = bflags.build("l1");
            std::optional<SyntheticInstance> inst;
            Matrix x;
            if (b_input.empty()) {
                inst = generate_synthetic(bsynth.spec(), bsynth.seed);
                x = inst->x;
            } else {
                x = read_matrix_csv(b_input);
            }
            SolverConfig gamma_cfg = cfg;
            if (!gamma_cfg.surrogate.is_gamma()) gamma_cfg.surrogate = RankSurrogate::gamma_norm(0.01);
            const SolverConfig base_cfg = nuclear_baseline(
                gamma_cfg, baseline_policy == "scale" ? LambdaPolicy::Scale : LambdaPolicy::Fixed);
            const SolverResult rg = solve(x, gamma_cfg);
            const SolverResult rn = solve(x, base_cfg);
            const SyntheticInstance* truth = inst ? &*inst : nullptr;
            nlohmann::json report = {
                {"rows", x.rows()},
                {"cols", x.cols()},
                {"gamma", bench_entry(rg, x, truth)},
                {"nuclear", bench_entry(rn, x, truth)},
            };
            if (inst) report["instance"] = bsynth.echo();
            write_json(b_out, report);
            out << "gamma rank " << report["gamma"]["rank_estimate"].get<int>() << " in " << rg.iterations
                << " iterations; nuclear rank " << report["nuclear"]["rank_estimate"].get<int>() << " in "
                << rn.iterations << " iterations\n";
            return (rg.converged && rn.converged) ? kOk : kNotConverged;
        }
        if (*stack) {
            std::vector<Matrix> frames;
            for (const auto& f : list_frames(frames_dir)) frames.push_back(read_pgm(f));
            for (const auto& f : frames) {
                if (f.rows() != frames.front().rows() || f.cols() != frames.front().cols()) {
                    throw IoError("frames in " + frames_dir + " do not share dimensions");
                }
            }
            write_matrix_csv(stack_out, stack_frames(frames));
            out << "stacked " << frames.size() << " frames of " << frames.front().rows() << "x"
                << frames.front().cols() << '\n';
            return kOk;
        }
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kInput;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << '\n';
        return kNumerical;
    } catch (const std::invalid_argument& e) {
        err << "usage error: " << e.what() << '\n';
        return kUsage;
    }
    return kUsage;
}

} // namespace nrpca::cli
