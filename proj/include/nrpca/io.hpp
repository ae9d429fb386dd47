#pragma once

// File formats: CSV matrices, PGM frames, and JSON run reports.

#include "nrpca/matrix.hpp"
#include "nrpca/problems.hpp"
#include "nrpca/solver.hpp"

#include <json.hpp>

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace nrpca {

/// Missing, malformed, or unsupported input files.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline double parse_double(std::string_view tok, const std::string& where) {
    tok = trim(tok);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || ec != std::errc{} || ptr != tok.data() + tok.size()) {
        throw IoError(where + ": cannot parse '" + std::string(tok) + "' as a number");
    }
    if (!std::isfinite(v)) throw IoError(where + ": non-finite value '" + std::string(tok) + "'");
    return v;
}

inline std::string format_double(double v) {
    char buf[32];
    const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf, static_cast<std::size_t>(n));
}

} // namespace detail

/// Comma-separated rows, one matrix row per line, no header. Blank lines are skipped.
inline Matrix parse_matrix_csv(std::istream& in, const std::string& name = "<csv>") {
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        std::vector<double> row;
        std::string_view rest(line);
        std::size_t col = 0;
        while (true) {
            ++col;
            const auto comma = rest.find(',');
            const std::string where = name + ": row " + std::to_string(rows.size() + 1) + " (line " +
                                      std::to_string(line_no) + "), column " + std::to_string(col);
            row.push_back(detail::parse_double(rest.substr(0, comma), where));
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw IoError(name + ": ragged row " + std::to_string(rows.size() + 1) + " has " +
                          std::to_string(row.size()) + " columns, expected " +
                          std::to_string(rows.front().size()));
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw IoError(name + ": no data rows");

    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return m;
}

inline Matrix read_matrix_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return parse_matrix_csv(in, path.string());
}

/// 17 significant digits, so every double survives a round trip.
inline void write_matrix_csv(std::ostream& out, const Matrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << detail::format_double(m(i, j));
        }
        out << '\n';
    }
}

inline void write_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    write_matrix_csv(out, m);
}

// PGM (P2 ASCII / P5 binary). Intensities are divided by the header maxval.

namespace detail {

// Next whitespace-delimited header token, skipping '#' comments.
inline std::string pgm_token(std::istream& in, const std::string& name) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {}
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) break;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    if (tok.empty()) throw IoError(name + ": truncated PGM header");
    return tok;
}

inline long pgm_int(std::istream& in, const std::string& name, const char* field) {
    const std::string tok = pgm_token(in, name);
    long v = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size() || v <= 0) {
        throw IoError(name + ": invalid PGM " + field + " '" + tok + "'");
    }
    return v;
}

} // namespace detail

inline Matrix parse_pgm(std::istream& in, const std::string& name = "<pgm>") {
    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (!in || magic[0] != 'P' || (magic[1] != '2' && magic[1] != '5')) {
        throw IoError(name + ": unsupported image format (expected PGM magic P2 or P5)");
    }
    const bool binary = magic[1] == '5';
    const long width = detail::pgm_int(in, name, "width");
    const long height = detail::pgm_int(in, name, "height");
    const long maxval = detail::pgm_int(in, name, "maxval");
    if (maxval > 65535) throw IoError(name + ": PGM maxval " + std::to_string(maxval) + " exceeds 65535");

    Matrix m(height, width);
    const double scale = 1.0 / static_cast<double>(maxval);
    for (long i = 0; i < height; ++i) {
        for (long j = 0; j < width; ++j) {
            long v = 0;
            if (binary) {
                unsigned char bytes[2] = {0, 0};
                const std::streamsize nbytes = maxval < 256 ? 1 : 2;
                in.read(reinterpret_cast<char*>(bytes), nbytes);
                if (in.gcount() != nbytes) {
                    throw IoError(name + ": truncated PGM payload at pixel (" + std::to_string(i) + ", " +
                                  std::to_string(j) + ")");
                }
                v = nbytes == 1 ? bytes[0] : (static_cast<long>(bytes[0]) << 8) | bytes[1];
            } else {
                std::string tok;
                if (!(in >> tok)) {
                    throw IoError(name + ": truncated PGM payload at pixel (" + std::to_string(i) + ", " +
                                  std::to_string(j) + ")");
                }
                const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
                if (ec != std::errc{} || ptr != tok.data() + tok.size() || v < 0) {
                    throw IoError(name + ": invalid PGM sample '" + tok + "'");
                }
            }
            if (v > maxval) throw IoError(name + ": PGM sample " + std::to_string(v) + " exceeds maxval");
            m(i, j) = static_cast<double>(v) * scale;
        }
    }
    return m;
}

inline Matrix read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    return parse_pgm(in, path.string());
}

/// Writes intensities in [0, 1] as a binary PGM, quantized to maxval.
inline void write_pgm(const std::filesystem::path& path, const Matrix& m, int maxval = 255, bool binary = true) {
    detail::require(maxval > 0 && maxval <= 65535, "write_pgm: maxval must lie in [1, 65535]");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << (binary ? "P5" : "P2") << '\n' << m.cols() << ' ' << m.rows() << '\n' << maxval << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            const double c = std::clamp(m(i, j), 0.0, 1.0);
            const long v = std::lround(c * maxval);
            if (binary) {
                if (maxval < 256) {
                    out.put(static_cast<char>(v));
                } else {
                    out.put(static_cast<char>(v >> 8));
                    out.put(static_cast<char>(v & 0xff));
                }
            } else {
                out << v << (j + 1 == m.cols() ? '\n' : ' ');
            }
        }
    }
}

// JSON: configuration echo and run reports.

inline nlohmann::json to_json(const SolverConfig& c) {
    return {
        {"lambda", c.lambda},
        {"lambda_policy", c.lambda_policy == LambdaPolicy::Scale ? "scale" : "fixed"},
        {"mu0", c.mu0},
        {"rho", c.rho},
        {"mu_max", c.mu_max},
        {"tol", c.tol},
        {"max_outer", c.max_outer},
        {"surrogate", c.surrogate.name()},
        {"gamma", c.surrogate.gamma},
        {"penalty", to_string(c.penalty)},
        {"dc_max_inner", c.dc.max_inner},
        {"dc_tol", c.dc.tol},
        {"rank_threshold", c.rank_threshold},
    };
}

/// Inverse of to_json(SolverConfig). Missing keys keep their defaults.
inline SolverConfig config_from_json(const nlohmann::json& j) {
    SolverConfig c;
    try {
        c.lambda = j.value("lambda", c.lambda);
        c.mu0 = j.value("mu0", c.mu0);
        c.rho = j.value("rho", c.rho);
        c.mu_max = j.value("mu_max", c.mu_max);
        c.tol = j.value("tol", c.tol);
        c.max_outer = j.value("max_outer", c.max_outer);
        c.dc.max_inner = j.value("dc_max_inner", c.dc.max_inner);
        c.dc.tol = j.value("dc_tol", c.dc.tol);
        c.rank_threshold = j.value("rank_threshold", c.rank_threshold);

        const std::string policy = j.value("lambda_policy", std::string("fixed"));
        if (policy != "fixed" && policy != "scale") throw IoError("unknown lambda_policy '" + policy + "'");
        c.lambda_policy = policy == "scale" ? LambdaPolicy::Scale : LambdaPolicy::Fixed;

        const std::string sur = j.value("surrogate", std::string("gamma"));
        if (sur == "gamma") {
            c.surrogate = RankSurrogate::gamma_norm(j.value("gamma", 0.01));
        } else if (sur == "nuclear") {
            c.surrogate = RankSurrogate::nuclear();
        } else {
            throw IoError("unknown surrogate '" + sur + "'");
        }

        const std::string pen = j.value("penalty", std::string("l1"));
        if (pen != "l1" && pen != "l21") throw IoError("unknown penalty '" + pen + "'");
        c.penalty = pen == "l1" ? SparsePenalty::EntrywiseL1 : SparsePenalty::ColumnwiseL21;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("invalid configuration: ") + e.what());
    }
    return c;
}

inline nlohmann::json to_json(const IterationRecord& r) {
    return {
        {"iter", r.iter},
        {"residual", r.residual},
        {"lagrangian", r.lagrangian},
        {"rank", r.rank_estimate},
        {"y_inf_norm", r.y_inf_norm},
        {"y_max_col_norm", r.y_max_col_norm},
        {"dc_iters", r.dc_iters},
        {"mu", r.mu},
        {"s_change", r.s_change},
    };
}

/// RunReport: effective parameters, outcome, and per-iteration history.
inline nlohmann::json make_report(const SolverResult& res, const Matrix& x) {
    nlohmann::json history = nlohmann::json::array();
    for (const auto& r : res.history) history.push_back(to_json(r));
    return {
        {"params", to_json(res.config)},
        {"rows", x.rows()},
        {"cols", x.cols()},
        {"iterations", res.iterations},
        {"converged", res.converged},
        {"final_residual", relative_residual(x, res.l, res.s)},
        {"rank_estimate", res.l.size() ? rank_estimate(res.l, res.config.rank_threshold) : 0},
        {"kkt", {{"primal", res.kkt.primal}, {"dual", res.kkt.dual}}},
        {"elapsed_seconds", res.elapsed_seconds},
        {"history", std::move(history)},
    };
}

inline nlohmann::json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

} // namespace nrpca
