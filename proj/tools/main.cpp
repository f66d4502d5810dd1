// Command-line front end for the sweep BVP solver: climb trajectories,
// standalone linear systems, and the verification suite.

#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "sweepbvp/core.hpp"
#include "sweepbvp/errors.hpp"
#include "sweepbvp/flight.hpp"
#include "sweepbvp/io.hpp"
#include "sweepbvp/newton.hpp"
#include "sweepbvp/sweep.hpp"
#include "sweepbvp/validation.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;       // bad flags, config, or input files
constexpr int kExitNotConverged = 2; // iteration ran out
constexpr int kExitSolverFailure = 3; // singular pivot/state/system, non-finite
constexpr int kExitCheckFailed = 4;  // a verification check did not hold

struct FlagSet {
    std::size_t nodes = 0;
    double tf = 0.0, h0 = 0.0, v0 = 0.0, x0 = 0.0, hf = 0.0;
    double tol = 0.0, damping = 0.0;
    int max_iters = 0;
    std::uint64_t seed = 0;
    std::string config_path;
    std::string output_dir;
};

void add_common_flags(CLI::App* cmd, FlagSet& flags) {
    cmd->add_option("--config", flags.config_path, "key=value config file; flags win");
    cmd->add_option("--output", flags.output_dir, "output directory (default .)");
    cmd->add_option("--seed", flags.seed, "seed for randomized checks");
}

void add_flight_flags(CLI::App* cmd, FlagSet& flags) {
    cmd->add_option("--nodes", flags.nodes, "number of Euler steps N (default 10000)");
    cmd->add_option("--tf", flags.tf, "final time in seconds (default 40)");
    cmd->add_option("--h0", flags.h0, "initial altitude, ft (default 0)");
    cmd->add_option("--v0", flags.v0, "initial speed, ft/s (default 960)");
    cmd->add_option("--x0", flags.x0, "initial range, ft (default 0)");
    cmd->add_option("--hf", flags.hf, "target final altitude, ft (default 35000)");
    cmd->add_option("--tol", flags.tol, "Newton tolerance on the scaled update norm");
    cmd->add_option("--max-iters", flags.max_iters, "Newton iteration cap (default 50)");
    cmd->add_option("--damping", flags.damping, "Newton damping in (0,1] (default 1)");
}

// Count of a flag that may not be registered on this subcommand.
std::size_t flag_count(const CLI::App* cmd, const std::string& name) {
    const CLI::Option* opt = cmd->get_option_no_throw(name);
    return opt ? opt->count() : 0;
}

sweepbvp::RunConfig build_config(const CLI::App* cmd, const FlagSet& flags) {
    sweepbvp::RunConfig config;
    if (flag_count(cmd, "--config") > 0) {
        std::ifstream in(flags.config_path);
        if (!in) throw std::invalid_argument("cannot open config file '" + flags.config_path + "'");
        sweepbvp::apply_config(config, sweepbvp::parse_config_file(in));
    }
    if (flag_count(cmd, "--nodes") > 0) config.nodes = flags.nodes;
    if (flag_count(cmd, "--tf") > 0) config.tf = flags.tf;
    if (flag_count(cmd, "--h0") > 0) config.h0 = flags.h0;
    if (flag_count(cmd, "--v0") > 0) config.v0 = flags.v0;
    if (flag_count(cmd, "--x0") > 0) config.x0 = flags.x0;
    if (flag_count(cmd, "--hf") > 0) config.hf = flags.hf;
    if (flag_count(cmd, "--tol") > 0) config.tol = flags.tol;
    if (flag_count(cmd, "--max-iters") > 0) config.max_iters = flags.max_iters;
    if (flag_count(cmd, "--damping") > 0) config.damping = flags.damping;
    if (flag_count(cmd, "--seed") > 0) config.seed = flags.seed;
    if (flag_count(cmd, "--output") > 0) config.output_dir = flags.output_dir;
    return config;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot write to '" + path.string() + "'");
    return out;
}

int run_solve_flight(const CLI::App* cmd, const FlagSet& flags) {
    const sweepbvp::RunConfig config = build_config(cmd, flags);
    const sweepbvp::TimeGrid grid(config.nodes, config.tf);
    const sweepbvp::BoundarySpec bc =
        sweepbvp::flight_boundary(config.h0, config.v0, config.x0, config.hf);
    const sweepbvp::FlightModel model(config.params);
    const sweepbvp::OdeProblem problem = sweepbvp::flight_problem(model, grid, bc);
    const sweepbvp::NewtonConfig newton{config.tol, config.max_iters, config.damping};

    const sweepbvp::SolveReport report =
        sweepbvp::solve_nonlinear(problem, newton, sweepbvp::default_initial_guess(problem));
    if (!report.converged) {
        std::cerr << "not converged after " << report.iterations
                  << " iterations; last scaled update "
                  << sweepbvp::format_double(report.final_update_norm) << '\n';
        return kExitNotConverged;
    }

    const std::filesystem::path dir(config.output_dir);
    auto csv = open_output(dir / "trajectory.csv");
    sweepbvp::write_flight_csv(csv, report.trajectory);
    auto rep = open_output(dir / "report.txt");
    sweepbvp::write_report(rep, config, report);

    std::cout << "converged in " << report.iterations << " iterations, terminal residual "
              << sweepbvp::format_double(report.terminal_residual) << " ft, wall time "
              << sweepbvp::format_double(report.wall_time_seconds) << " s\n"
              << "wrote " << (dir / "trajectory.csv").string() << " and "
              << (dir / "report.txt").string() << '\n';
    return kExitOk;
}

std::pair<std::size_t, double> parse_fixed_flag(const std::string& text) {
    const std::size_t eq = text.find('=');
    if (eq == std::string::npos)
        throw std::invalid_argument("--fixed expects INDEX=VALUE, got '" + text + "'");
    std::size_t index = 0;
    const auto* begin = text.data();
    const auto res = std::from_chars(begin, begin + eq, index);
    if (res.ec != std::errc{} || res.ptr != begin + eq || index < 1)
        throw std::invalid_argument("--fixed expects a 1-based component index, got '" + text +
                                    "'");
    const std::string value_text = text.substr(eq + 1);
    double value = 0.0;
    const auto vres =
        std::from_chars(value_text.data(), value_text.data() + value_text.size(), value);
    if (vres.ec != std::errc{} || vres.ptr != value_text.data() + value_text.size())
        throw std::invalid_argument("--fixed: bad value in '" + text + "'");
    return {index - 1, value};
}

int run_solve_linear(const CLI::App* cmd, const FlagSet& flags, const std::string& input_path,
                     const std::vector<std::string>& fixed_flags, std::size_t free_index_1based,
                     std::size_t terminal_index_1based, double terminal_value) {
    std::ifstream in(input_path);
    if (!in) throw std::invalid_argument("cannot open input file '" + input_path + "'");
    sweepbvp::ParsedLinearSystem system = sweepbvp::parse_linear_system(in);

    if (free_index_1based < 1 || terminal_index_1based < 1)
        throw std::invalid_argument("component indices are 1-based");
    std::vector<std::pair<std::size_t, double>> fixed;
    for (const auto& text : fixed_flags) fixed.push_back(parse_fixed_flag(text));
    const sweepbvp::BoundarySpec bc(system.coeffs.dimension(), std::move(fixed),
                                    free_index_1based - 1, terminal_index_1based - 1,
                                    terminal_value);

    // The recurrence carries its own step scaling, so the time grid only
    // labels the output rows.
    const sweepbvp::TimeGrid grid(system.n_steps, 1.0);
    const sweepbvp::Trajectory traj = sweepbvp::solve_linear(grid, system.coeffs, bc);

    const std::filesystem::path dir(cmd->count("--output") > 0 ? flags.output_dir : ".");
    auto csv = open_output(dir / "trajectory.csv");
    sweepbvp::write_linear_csv(csv, traj);
    std::cout << "solved " << system.n_steps << "-step system of dimension "
              << system.coeffs.dimension() << ", wrote " << (dir / "trajectory.csv").string()
              << '\n';
    return kExitOk;
}

struct CheckRow {
    bool pass;
    std::string text;
};

void print_rows(const std::vector<CheckRow>& rows) {
    for (const auto& row : rows)
        std::cout << (row.pass ? "[PASS] " : "[FAIL] ") << row.text << '\n';
}

int run_verify(const CLI::App* cmd, const FlagSet& flags, bool corrupt_jacobian) {
    const sweepbvp::RunConfig config = build_config(cmd, flags);
    std::vector<CheckRow> rows;
    std::ostringstream line;
    const auto add = [&rows, &line](bool pass) {
        rows.push_back({pass, line.str()});
        line.str("");
    };

    const auto suite = sweepbvp::linear_oracle_suite(config.seed, 200);
    line << "linear sweep vs dense oracle: " << suite.compared << " instances, worst "
         << sweepbvp::format_double(suite.worst_rel_error) << " (<= 1e-8), skipped "
         << suite.skipped;
    add(suite.worst_rel_error <= 1e-8 && suite.compared + suite.skipped == 200);

    const sweepbvp::FlightModel model(config.params);
    for (const std::size_t n : {std::size_t{100}, std::size_t{1000}, std::size_t{10000}}) {
        const auto cmp = sweepbvp::compare_newton_shooting(
            model, n, config.tf, config.h0, config.v0, config.x0, config.hf,
            sweepbvp::NewtonConfig{config.tol, config.max_iters, config.damping});
        line << "newton vs shooting N=" << n << ": dgamma0 "
             << sweepbvp::format_double(cmp.gamma0_difference) << " (<= 1e-6), dtraj "
             << sweepbvp::format_double(cmp.trajectory_difference) << " (<= 1e-5)";
        add(cmp.newton_converged && cmp.gamma0_difference <= 1e-6 &&
            cmp.trajectory_difference <= 1e-5);
    }

    {
        // Desk-scale N for the residual check on a seeded linear instance.
        const auto inst = sweepbvp::random_linear_instance(config.seed, 50, 4);
        const auto traj = sweepbvp::solve_linear(inst.grid, inst.coeffs, inst.bc);
        const auto rep = sweepbvp::check_residuals(traj, inst.coeffs, inst.bc);
        line << "linear residuals N=50 K=4: scaled "
             << sweepbvp::format_double(rep.max_scaled_residual) << " (<= 1e-10)";
        add(rep.max_scaled_residual <= 1e-10);
    }

    {
        const sweepbvp::TimeGrid grid(config.nodes, config.tf);
        const sweepbvp::BoundarySpec bc =
            sweepbvp::flight_boundary(config.h0, config.v0, config.x0, config.hf);
        const auto problem = sweepbvp::flight_problem(model, grid, bc);
        const auto report = sweepbvp::solve_nonlinear(
            problem, sweepbvp::NewtonConfig{config.tol, config.max_iters, config.damping},
            sweepbvp::default_initial_guess(problem));
        const auto rep = sweepbvp::check_residuals(report.trajectory, problem);
        line << "euler residuals N=" << config.nodes << ": scaled "
             << sweepbvp::format_double(rep.max_scaled_residual) << " (<= 1e-8)";
        add(report.converged && rep.max_scaled_residual <= 1e-8);
    }

    {
        const double worst =
            corrupt_jacobian
                ? sweepbvp::jacobian_fd_check_corrupted(config.params, 1000, config.seed)
                : sweepbvp::jacobian_fd_check(config.params, 1000, config.seed);
        line << "jacobian vs central differences: worst " << sweepbvp::format_double(worst)
             << " (<= 1e-6)" << (corrupt_jacobian ? " [corrupted entry]" : "");
        add(worst <= 1e-6);
    }

    print_rows(rows);
    bool all = true;
    for (const auto& row : rows) all = all && row.pass;
    std::cout << "overall: " << (all ? "PASS" : "FAIL") << '\n';
    return all ? kExitOk : kExitCheckFailed;
}

int run_jacobian_check(const CLI::App* cmd, const FlagSet& flags, std::size_t samples) {
    const sweepbvp::RunConfig config = build_config(cmd, flags);
    const double worst = sweepbvp::jacobian_fd_check(config.params, samples, config.seed);
    const bool pass = worst <= 1e-6;
    std::cout << (pass ? "[PASS] " : "[FAIL] ") << "jacobian vs central differences over "
              << samples << " states: worst " << sweepbvp::format_double(worst)
              << " (<= 1e-6)\n";
    return pass ? kExitOk : kExitCheckFailed;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sweep-method solver for two-point boundary value problems"};
    app.require_subcommand(1);

    FlagSet flight_flags;
    CLI::App* solve_flight =
        app.add_subcommand("solve-flight", "solve the climb problem and emit trajectory.csv");
    add_flight_flags(solve_flight, flight_flags);
    add_common_flags(solve_flight, flight_flags);

    FlagSet linear_flags;
    std::string linear_input;
    std::vector<std::string> fixed_flags;
    std::size_t free_index = 0, terminal_index = 0;
    double terminal_value = 0.0;
    CLI::App* solve_linear =
        app.add_subcommand("solve-linear", "solve a linear difference-system BVP from a file");
    solve_linear->add_option("input", linear_input, "system file: 'N K' header, then per step K coefficient rows and one forcing row")
        ->required();
    solve_linear->add_option("--fixed", fixed_flags,
                             "fixed initial condition INDEX=VALUE, 1-based; repeatable")
        ->required();
    solve_linear->add_option("--free", free_index, "1-based index of the free initial component")
        ->required();
    solve_linear->add_option("--terminal", terminal_index,
                             "1-based index of the terminally pinned component")
        ->required();
    solve_linear->add_option("--terminal-value", terminal_value, "prescribed terminal value")
        ->required();
    add_common_flags(solve_linear, linear_flags);

    FlagSet verify_flags;
    bool corrupt_jacobian = false;
    CLI::App* verify = app.add_subcommand("verify", "run the oracle and residual check suite");
    add_flight_flags(verify, verify_flags);
    add_common_flags(verify, verify_flags);
    verify->add_flag("--corrupt-jacobian", corrupt_jacobian,
                     "inject a wrong jacobian entry (the suite must then fail)")
        ->group("");

    FlagSet jac_flags;
    std::size_t samples = 1000;
    CLI::App* jacobian_check =
        app.add_subcommand("jacobian-check", "compare the analytic jacobian to finite differences");
    jacobian_check->add_option("--samples", samples, "number of random states (default 1000)");
    add_common_flags(jacobian_check, jac_flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (solve_flight->parsed()) return run_solve_flight(solve_flight, flight_flags);
        if (solve_linear->parsed())
            return run_solve_linear(solve_linear, linear_flags, linear_input, fixed_flags,
                                    free_index, terminal_index, terminal_value);
        if (verify->parsed()) return run_verify(verify, verify_flags, corrupt_jacobian);
        if (jacobian_check->parsed()) return run_jacobian_check(jacobian_check, jac_flags, samples);
    } catch (const sweepbvp::ParseError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const sweepbvp::SolverError& e) {
        std::cerr << "solver error [" << sweepbvp::to_string(e.code()) << "]: " << e.what()
                  << '\n';
        return kExitSolverFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitSolverFailure;
    }
    return kExitConfig;
}
