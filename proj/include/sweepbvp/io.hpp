#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "sweepbvp/core.hpp"
#include "sweepbvp/errors.hpp"
#include "sweepbvp/flight.hpp"
#include "sweepbvp/newton.hpp"

namespace sweepbvp {

/// Shortest decimal representation that round-trips to the same double.
inline std::string format_double(double value) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

/// Climb trajectory CSV: header `t,h,gamma,V,x`, one row per node, t = n*d.
inline void write_flight_csv(std::ostream& out, const Trajectory& traj) {
    if (traj.dimension() != kFlightDim)
        throw SolverError(ErrorCode::DimensionMismatch,
                          "flight CSV requires a 4-component trajectory");
    out << "t,h,gamma,V,x\n";
    for (std::size_t n = 0; n < traj.n_nodes(); ++n) {
        out << format_double(traj.grid().time(n));
        for (std::size_t k = 0; k < kFlightDim; ++k) out << ',' << format_double(traj.u(n, k));
        out << '\n';
    }
}

/// Generic trajectory CSV: header `n,u_1,...,u_K`, one row per node.
inline void write_linear_csv(std::ostream& out, const Trajectory& traj) {
    out << 'n';
    for (std::size_t k = 0; k < traj.dimension(); ++k) out << ',' << component_label(k);
    out << '\n';
    for (std::size_t n = 0; n < traj.n_nodes(); ++n) {
        out << n;
        for (std::size_t k = 0; k < traj.dimension(); ++k)
            out << ',' << format_double(traj.u(n, k));
        out << '\n';
    }
}

/// Input error with the 1-based line it occurred on.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

namespace detail {

inline double parse_double_token(std::string_view token, std::size_t line_no) {
    double value = 0.0;
    const char* begin = token.data();
    const char* end = begin + token.size();
    const auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc{} || res.ptr != end)
        throw ParseError(line_no, "expected a number, got '" + std::string(token) + "'");
    if (!std::isfinite(value))
        throw ParseError(line_no, "non-finite value '" + std::string(token) + "'");
    return value;
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> tokens;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        std::size_t start = i;
        while (i < line.size() && !(line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        if (i > start) tokens.push_back(line.substr(start, i - start));
    }
    return tokens;
}

} // namespace detail

struct ParsedLinearSystem {
    std::size_t n_steps;
    LinearCoefficients coeffs;
};

/// Text format for a linear difference system: a header line `N K`, then for
/// each step n = 0..N-1, K lines of K coefficient entries followed by one
/// line of K forcing-term entries. Blank lines are not allowed inside the
/// body; numbers are whitespace-separated.
inline ParsedLinearSystem parse_linear_system(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    const auto next_tokens = [&](const char* what) {
        if (!std::getline(in, line))
            throw ParseError(line_no + 1, std::string("unexpected end of file, expected ") + what);
        ++line_no;
        return detail::split_ws(line);
    };

    const auto header = next_tokens("header 'N K'");
    if (header.size() != 2)
        throw ParseError(line_no, "header must be two integers 'N K'");
    const auto parse_size = [&](std::string_view token, const char* what) {
        std::size_t value = 0;
        const auto res = std::from_chars(token.data(), token.data() + token.size(), value);
        if (res.ec != std::errc{} || res.ptr != token.data() + token.size())
            throw ParseError(line_no, std::string("bad ") + what + " '" + std::string(token) + "'");
        return value;
    };
    const std::size_t n_steps = parse_size(header[0], "step count N");
    const std::size_t dim = parse_size(header[1], "dimension K");
    if (n_steps < 2) throw ParseError(line_no, "N must be at least 2");
    if (dim < 2) throw ParseError(line_no, "K must be at least 2");

    LinearCoefficients coeffs(n_steps, dim);
    for (std::size_t n = 0; n < n_steps; ++n) {
        for (std::size_t k = 0; k < dim; ++k) {
            const auto tokens = next_tokens("a coefficient row");
            if (tokens.size() != dim)
                throw ParseError(line_no, "expected " + std::to_string(dim) +
                                              " coefficient entries, got " +
                                              std::to_string(tokens.size()));
            for (std::size_t j = 0; j < dim; ++j)
                coeffs.a(n, k, j) = detail::parse_double_token(tokens[j], line_no);
        }
        const auto tokens = next_tokens("forcing-term row");
        if (tokens.size() != dim)
            throw ParseError(line_no, "expected " + std::to_string(dim) +
                                          " forcing-term entries, got " +
                                          std::to_string(tokens.size()));
        for (std::size_t k = 0; k < dim; ++k)
            coeffs.g(n, k) = detail::parse_double_token(tokens[k], line_no);
    }
    while (std::getline(in, line)) {
        ++line_no;
        if (!detail::split_ws(line).empty())
            throw ParseError(line_no, "trailing content after the last forcing-term row");
    }
    return ParsedLinearSystem{n_steps, std::move(coeffs)};
}

inline void write_linear_system(std::ostream& out, const LinearCoefficients& coeffs) {
    out << coeffs.n_steps() << ' ' << coeffs.dimension() << '\n';
    for (std::size_t n = 0; n < coeffs.n_steps(); ++n) {
        for (std::size_t k = 0; k < coeffs.dimension(); ++k) {
            for (std::size_t j = 0; j < coeffs.dimension(); ++j) {
                if (j) out << ' ';
                out << format_double(coeffs.a(n, k, j));
            }
            out << '\n';
        }
        for (std::size_t k = 0; k < coeffs.dimension(); ++k) {
            if (k) out << ' ';
            out << format_double(coeffs.g(n, k));
        }
        out << '\n';
    }
}

/// Everything a solver run needs, with the climb defaults baked in.
struct RunConfig {
    std::size_t nodes = 10000;
    double tf = 40.0;
    double h0 = 0.0;
    double v0 = 960.0;
    double x0 = 0.0;
    double hf = 35000.0;
    double tol = 1e-9;
    int max_iters = 50;
    double damping = 1.0;
    std::uint64_t seed = 46000;
    std::string output_dir = ".";
    FlightParams params;
};

/// Flat key=value file. '#' starts a comment; blank lines are skipped;
/// later occurrences of a key win. Values keep everything after the first
/// '=' (trimmed), keys must be nonempty.
inline std::map<std::string, std::string> parse_config_file(std::istream& in) {
    std::map<std::string, std::string> entries;
    std::string line;
    std::size_t line_no = 0;
    const auto trim = [](std::string_view s) {
        std::size_t b = 0, e = s.size();
        while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
        while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
        return std::string(s.substr(b, e - b));
    };
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        std::string_view body(line);
        if (hash != std::string::npos) body = body.substr(0, hash);
        const std::string stripped = trim(body);
        if (stripped.empty()) continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ParseError(line_no, "expected key=value, got '" + stripped + "'");
        const std::string key = trim(std::string_view(stripped).substr(0, eq));
        const std::string value = trim(std::string_view(stripped).substr(eq + 1));
        if (key.empty()) throw ParseError(line_no, "empty key");
        entries[key] = value;
    }
    return entries;
}

namespace detail {

inline double config_double(const std::string& key, const std::string& value) {
    double out = 0.0;
    const auto res = std::from_chars(value.data(), value.data() + value.size(), out);
    if (res.ec != std::errc{} || res.ptr != value.data() + value.size())
        throw std::invalid_argument("config key '" + key + "': bad number '" + value + "'");
    if (!std::isfinite(out))
        throw std::invalid_argument("config key '" + key + "': non-finite value");
    return out;
}

template <typename Int>
inline Int config_int(const std::string& key, const std::string& value) {
    Int out{};
    const auto res = std::from_chars(value.data(), value.data() + value.size(), out);
    if (res.ec != std::errc{} || res.ptr != value.data() + value.size())
        throw std::invalid_argument("config key '" + key + "': bad integer '" + value + "'");
    return out;
}

} // namespace detail

/// Applies parsed key=value entries onto a RunConfig. Unknown keys are an
/// error; CLI flags are applied afterwards by the caller, so flags win.
inline void apply_config(RunConfig& config, const std::map<std::string, std::string>& entries) {
    for (const auto& [key, value] : entries) {
        if (key == "nodes") config.nodes = detail::config_int<std::size_t>(key, value);
        else if (key == "tf") config.tf = detail::config_double(key, value);
        else if (key == "h0") config.h0 = detail::config_double(key, value);
        else if (key == "v0") config.v0 = detail::config_double(key, value);
        else if (key == "x0") config.x0 = detail::config_double(key, value);
        else if (key == "hf") config.hf = detail::config_double(key, value);
        else if (key == "tol") config.tol = detail::config_double(key, value);
        else if (key == "max_iters") config.max_iters = detail::config_int<int>(key, value);
        else if (key == "damping") config.damping = detail::config_double(key, value);
        else if (key == "seed") config.seed = detail::config_int<std::uint64_t>(key, value);
        else if (key == "output") config.output_dir = value;
        else if (key == "mass") config.params.mass = detail::config_double(key, value);
        else if (key == "wing_area") config.params.wing_area = detail::config_double(key, value);
        else if (key == "alpha_deg") config.params.alpha_deg = detail::config_double(key, value);
        else if (key == "thrust_line_angle")
            config.params.thrust_line_angle = detail::config_double(key, value);
        else if (key == "gravity") config.params.gravity = detail::config_double(key, value);
        else if (key == "sea_level_density")
            config.params.sea_level_density = detail::config_double(key, value);
        else if (key == "scale_height")
            config.params.scale_height = detail::config_double(key, value);
        else if (key == "cl_quadratic") config.params.cl_coeffs[0] = detail::config_double(key, value);
        else if (key == "cl_linear") config.params.cl_coeffs[1] = detail::config_double(key, value);
        else if (key == "cl_constant") config.params.cl_coeffs[2] = detail::config_double(key, value);
        else if (key == "cl_factor") config.params.cl_factor = detail::config_double(key, value);
        else if (key == "cd_quadratic") config.params.cd_coeffs[0] = detail::config_double(key, value);
        else if (key == "cd_linear") config.params.cd_coeffs[1] = detail::config_double(key, value);
        else if (key == "cd_constant") config.params.cd_coeffs[2] = detail::config_double(key, value);
        else if (key == "cd_factor") config.params.cd_factor = detail::config_double(key, value);
        else if (key == "earth_radius")
            config.params.earth_radius = detail::config_double(key, value);
        else
            throw std::invalid_argument("unknown config key '" + key + "'");
    }
}

/// Human-readable run summary for report.txt.
inline void write_report(std::ostream& out, const RunConfig& config, const SolveReport& report) {
    out << "nodes: " << config.nodes << '\n'
        << "t_final: " << format_double(config.tf) << " s\n"
        << "converged: " << (report.converged ? "yes" : "no") << '\n'
        << "iterations: " << report.iterations << '\n'
        << "final_update_norm: " << format_double(report.final_update_norm) << '\n'
        << "terminal_residual: " << format_double(report.terminal_residual) << " ft\n"
        << "initial_path_angle: " << format_double(report.trajectory.u(0, kPathAngle))
        << " rad\n"
        << "wall_time: " << format_double(report.wall_time_seconds) << " s\n";
}

} // namespace sweepbvp
