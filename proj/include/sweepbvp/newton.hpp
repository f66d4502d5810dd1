#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sweepbvp/core.hpp"
#include "sweepbvp/errors.hpp"
#include "sweepbvp/sweep.hpp"

namespace sweepbvp {

using RhsFn = std::function<void(std::span<const double>, std::span<double>)>;
using JacobianFn = std::function<void(std::span<const double>, std::span<double>)>;

/// First-order ODE system u' = f(u) with two-point boundary data, to be
/// discretized by forward Euler on `grid`. `jacobian` writes df_k/du_j
/// row-major (K*K). Both callbacks must be pure.
struct OdeProblem {
    std::size_t dimension;
    RhsFn rhs;
    JacobianFn jacobian;
    TimeGrid grid;
    BoundarySpec bc;
};

struct NewtonConfig {
    double tolerance = 1e-9;  // on the scaled max norm of the update
    int max_iterations = 50;
    double damping = 1.0;     // in (0, 1]; 1.0 is a plain Newton step

    void check() const {
        if (!(std::isfinite(tolerance) && tolerance > 0.0))
            throw std::invalid_argument("NewtonConfig: tolerance must be positive");
        if (max_iterations < 1)
            throw std::invalid_argument("NewtonConfig: max_iterations must be >= 1");
        if (!(damping > 0.0 && damping <= 1.0))
            throw std::invalid_argument("NewtonConfig: damping must be in (0, 1]");
    }
};

struct SolveReport {
    Trajectory trajectory;
    int iterations = 0;
    double final_update_norm = std::numeric_limits<double>::infinity();
    double terminal_residual = 0.0;
    bool converged = false;
    double wall_time_seconds = 0.0;
};

namespace detail {

inline void eval_rhs(const RhsFn& rhs, std::span<const double> state, std::span<double> out) {
    rhs(state, out);
    if (!all_finite(out))
        throw SolverError(ErrorCode::NonFinite, "rhs returned NaN or Inf");
}

inline void eval_jacobian(const JacobianFn& jac, std::span<const double> state,
                          std::span<double> out) {
    jac(state, out);
    if (!all_finite(out))
        throw SolverError(ErrorCode::NonFinite, "jacobian returned NaN or Inf");
}

} // namespace detail

/// One forward Euler step: state + d * rhs(state).
inline StateVector euler_step_map(const RhsFn& rhs, const StateVector& state, double d) {
    if (!all_finite(state))
        throw SolverError(ErrorCode::NonFinite, "state contains NaN or Inf");
    StateVector f(state.size());
    detail::eval_rhs(rhs, state, f);
    StateVector next(state.size());
    for (std::size_t k = 0; k < state.size(); ++k) next[k] = state[k] + d * f[k];
    return next;
}

/// First-order expansion of the Euler step map about `guess`. Step n of the
/// result applies to the expansion point exactly:
///   sum_j a(n,k,j) ug_j[n] + g(n,k) = ug_k[n] + f_k(ug[n]) * d.
inline LinearCoefficients linearize(const OdeProblem& problem, const Trajectory& guess) {
    const std::size_t N = problem.grid.n_steps();
    const std::size_t K = problem.dimension;
    if (guess.n_nodes() != N + 1 || guess.dimension() != K)
        throw SolverError(ErrorCode::DimensionMismatch,
                          "guess trajectory does not match the problem grid/dimension");
    const double d = problem.grid.step();

    LinearCoefficients coeffs(N, K);
    std::vector<double> f(K), jac(K * K);
    for (std::size_t n = 0; n < N; ++n) {
        const auto state = guess.row(n);
        detail::eval_rhs(problem.rhs, state, f);
        detail::eval_jacobian(problem.jacobian, state, jac);
        for (std::size_t k = 0; k < K; ++k) {
            double dot = 0.0;
            for (std::size_t j = 0; j < K; ++j) {
                const double jkj = jac[k * K + j];
                coeffs.a(n, k, j) = (k == j ? 1.0 : 0.0) + jkj * d;
                dot += jkj * state[j];
            }
            coeffs.g(n, k) = (f[k] - dot) * d;
        }
    }
    return coeffs;
}

/// max over nodes and components of |next - current| / (1 + |current|).
inline double scaled_update_norm(const Trajectory& next, const Trajectory& current) {
    double norm = 0.0;
    for (std::size_t n = 0; n < current.n_nodes(); ++n)
        for (std::size_t k = 0; k < current.dimension(); ++k) {
            const double cur = current.u(n, k);
            norm = std::max(norm, std::abs(next.u(n, k) - cur) / (1.0 + std::abs(cur)));
        }
    return norm;
}

/// Newton iteration on the Euler-discretized BVP: linearize about the current
/// iterate, solve the linear BVP by the sweep, update, repeat until the
/// scaled update norm drops to the tolerance. Non-convergence is reported in
/// the returned SolveReport rather than thrown; singular pivots and
/// non-finite evaluations propagate as exceptions.
inline SolveReport solve_nonlinear(const OdeProblem& problem, const NewtonConfig& config,
                                   const Trajectory& initial_guess) {
    config.check();
    const std::size_t N = problem.grid.n_steps();
    const std::size_t K = problem.dimension;
    if (initial_guess.n_nodes() != N + 1 || initial_guess.dimension() != K)
        throw SolverError(ErrorCode::DimensionMismatch,
                          "initial guess does not match the problem grid/dimension");
    if (problem.bc.dimension() != K)
        throw SolverError(ErrorCode::DimensionMismatch,
                          "boundary spec does not match the problem dimension");
    for (const auto& [j, value] : problem.bc.fixed_initial())
        if (initial_guess.u(0, j) != value)
            throw SolverError(ErrorCode::BadBoundarySpec,
                              "initial guess violates the fixed initial value of " +
                                  component_label(j));

    const auto start = std::chrono::steady_clock::now();
    Trajectory current = initial_guess;
    double update_norm = std::numeric_limits<double>::infinity();
    bool converged = false;
    int iterations = 0;

    for (int it = 1; it <= config.max_iterations; ++it) {
        const LinearCoefficients coeffs = linearize(problem, current);
        Trajectory next = solve_linear(problem.grid, coeffs, problem.bc);
        update_norm = scaled_update_norm(next, current);
        iterations = it;
        if (config.damping == 1.0) {
            current = std::move(next);
        } else {
            for (std::size_t n = 0; n <= N; ++n)
                for (std::size_t k = 0; k < K; ++k)
                    current.u(n, k) += config.damping * (next.u(n, k) - current.u(n, k));
        }
        if (update_norm <= config.tolerance) {
            converged = true;
            break;
        }
    }

    const auto stop = std::chrono::steady_clock::now();
    SolveReport report{
        .trajectory = std::move(current),
        .iterations = iterations,
        .final_update_norm = update_norm,
        .terminal_residual = 0.0,
        .converged = converged,
        .wall_time_seconds = std::chrono::duration<double>(stop - start).count(),
    };
    report.terminal_residual = std::abs(
        report.trajectory.u(N, problem.bc.terminal_index()) - problem.bc.terminal_value());
    return report;
}

/// Boundary-consistent starting iterate for the climb problem: altitude
/// linear between its endpoint values, path angle at the constant climb
/// angle asin((hf - h0) / (V0 tf)) clamped to +-0.95 before the arcsine,
/// speed constant at V0, range advancing at V0 cos(gamma).
inline Trajectory default_initial_guess(const OdeProblem& problem) {
    const BoundarySpec& bc = problem.bc;
    const bool flight_shape = bc.dimension() == 4 && bc.free_initial_index() == 1 &&
                              bc.terminal_index() == 0;
    if (!flight_shape)
        throw SolverError(ErrorCode::BadBoundarySpec,
                          "default guess needs the climb layout: u_1, u_3, u_4 pinned at "
                          "t=0, u_2 free, u_1 terminal");
    const double h0 = bc.fixed_value(0);
    const double v0 = bc.fixed_value(2);
    const double x0 = bc.fixed_value(3);
    const double hf = bc.terminal_value();
    if (v0 == 0.0)
        throw SolverError(ErrorCode::BadBoundarySpec,
                          "default guess requires a nonzero initial speed");

    const TimeGrid& grid = problem.grid;
    const std::size_t N = grid.n_steps();
    const double ratio = (hf - h0) / (v0 * grid.t_final());
    const double gamma = std::asin(std::clamp(ratio, -0.95, 0.95));
    const double cos_gamma = std::cos(gamma);

    Trajectory guess(grid, 4);
    for (std::size_t n = 0; n <= N; ++n) {
        const double frac = static_cast<double>(n) / static_cast<double>(N);
        guess.u(n, 0) = h0 + (hf - h0) * frac;
        guess.u(n, 1) = gamma;
        guess.u(n, 2) = v0;
        guess.u(n, 3) = x0 + v0 * grid.time(n) * cos_gamma;
    }
    guess.u(0, 0) = h0;
    guess.u(N, 0) = hf;
    return guess;
}

} // namespace sweepbvp
