#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "sweepbvp/core.hpp"
#include "sweepbvp/errors.hpp"

namespace sweepbvp {

/// Relative pivot guard. A denominator whose magnitude is at or below
/// kPivotRelTol * (1 + max |a| entry of the offending step) is treated as
/// singular instead of being divided by.
inline constexpr double kPivotRelTol = 1e-13;

inline double pivot_tolerance(const LinearCoefficients& coeffs, std::size_t n) noexcept {
    return kPivotRelTol * (1.0 + coeffs.max_abs_a(n));
}

/// Affine representation of the free initial component in terms of the
/// terminal component at node 1:  u_p[0] = m0 * u_c[1] + z0.
struct FreeComponentSeed {
    double m0;
    double z0;
};

/// Solves row c (the terminal component) of step 0 for the free component p:
///   u_c[1] = sum_j a(0,c,j) u_j[0] + g(0,c),
/// where every u_j[0] except u_p[0] is pinned by the boundary spec. Requires
/// the pivot a(0,c,p) to clear the singularity guard.
inline FreeComponentSeed seed_free_component(const LinearCoefficients& coeffs,
                                             const BoundarySpec& bc) {
    const std::size_t c = bc.terminal_index();
    const std::size_t p = bc.free_initial_index();
    const double pivot = coeffs.a(0, c, p);
    if (std::abs(pivot) <= pivot_tolerance(coeffs, 0))
        throw SolverError(ErrorCode::SingularPivot,
                          "coefficient of " + component_label(p) + " in row " +
                              component_label(c) + " at step 0 is " + std::to_string(pivot) +
                              "; the free component cannot be eliminated");
    double s = coeffs.g(0, c);
    for (const auto& [j, value] : bc.fixed_initial()) s += coeffs.a(0, c, j) * value;
    return FreeComponentSeed{1.0 / pivot, -s / pivot};
}

/// Forward pass. Builds, level by level, the affine forms
///   u_k[n]   = m(n,k) u_c[n] + z(n,k),          n = 1..N,
///   u_k[n-1] = m_tilde(n-1,k) u_c[n] + z_tilde(n-1,k),   n = 1..N,
/// starting from the seed at n = 0 (pinned components contribute constant
/// forms, the free component the seed form). Each level n consumes the step
/// matrix A_{n-1}; the tilde tables at n additionally consume A_n, whose
/// terminal row supplies the eliminated denominator.
inline SweepTables forward_sweep(const LinearCoefficients& coeffs, const BoundarySpec& bc) {
    const std::size_t N = coeffs.n_steps();
    const std::size_t K = coeffs.dimension();
    const std::size_t c = bc.terminal_index();
    const std::size_t p = bc.free_initial_index();

    SweepTables tables(N, K);
    const FreeComponentSeed seed = seed_free_component(coeffs, bc);

    // Level 0: u_j[0] = m_tilde(0,j) u_c[1] + z_tilde(0,j).
    tables.m_tilde(0, p) = seed.m0;
    tables.z_tilde(0, p) = seed.z0;
    for (const auto& [j, value] : bc.fixed_initial()) tables.z_tilde(0, j) = value;

    // Row 0 of m/z mirrors the seed and the pinned values; the terminal row
    // is the identity at every level.
    tables.m(0, p) = seed.m0;
    tables.m(0, c) = 1.0;
    for (const auto& [j, value] : bc.fixed_initial())
        if (j != c) tables.z(0, j) = value;

    for (std::size_t n = 1; n <= N; ++n) {
        // u_k[n] = sum_j a(n-1,k,j) u_j[n-1] with the tilde forms substituted.
        const auto mt_prev = tables.m_tilde_row(n - 1);
        const auto zt_prev = tables.z_tilde_row(n - 1);
        for (std::size_t k = 0; k < K; ++k) {
            const auto row = coeffs.a_row(n - 1, k);
            double mk = 0.0, zk = 0.0;
            for (std::size_t j = 0; j < K; ++j) {
                mk += row[j] * mt_prev[j];
                zk += row[j] * zt_prev[j];
            }
            tables.m(n, k) = mk;
            tables.z(n, k) = zk + coeffs.g(n - 1, k);
        }
        tables.m(n, c) = 1.0;
        tables.z(n, c) = 0.0;

        if (n < N) {
            // Eliminate u_c[n] from its own row of step n:
            //   u_c[n+1] = [sum_j a(n,c,j) m(n,j)] u_c[n] + sum_j a(n,c,j) z(n,j) + g(n,c).
            const auto row = coeffs.a_row(n, c);
            double denom = 0.0, zsum = 0.0;
            for (std::size_t j = 0; j < K; ++j) {
                denom += row[j] * tables.m(n, j);
                zsum += row[j] * tables.z(n, j);
            }
            if (std::abs(denom) <= pivot_tolerance(coeffs, n))
                throw SolverError(ErrorCode::SingularPivot,
                                  "eliminated denominator for " + component_label(c) +
                                      " vanishes at step " + std::to_string(n));
            const double inv = 1.0 / denom;
            const double zc = -inv * (zsum + coeffs.g(n, c));
            for (std::size_t k = 0; k < K; ++k) {
                tables.m_tilde(n, k) = tables.m(n, k) * inv;
                tables.z_tilde(n, k) = tables.m(n, k) * zc + tables.z(n, k);
            }
        }
    }

    if (!tables.finite())
        throw SolverError(ErrorCode::Overflow, "sweep tables contain NaN or Inf");
    return tables;
}

/// Backward pass. Pins u_c[N] to the terminal value and walks the affine
/// forms down to n = 0. Pinned initial components are copied verbatim from
/// the boundary spec; the free one comes from the seed relation.
inline Trajectory backward_substitute(const TimeGrid& grid, const SweepTables& tables,
                                      const LinearCoefficients& coeffs, const BoundarySpec& bc) {
    const std::size_t N = coeffs.n_steps();
    const std::size_t K = coeffs.dimension();
    const std::size_t c = bc.terminal_index();
    const std::size_t p = bc.free_initial_index();
    if (tables.n_steps() != N || tables.dimension() != K)
        throw SolverError(ErrorCode::DimensionMismatch,
                          "sweep tables do not match the coefficient dimensions");

    Trajectory traj(grid, K);
    traj.u(N, c) = bc.terminal_value();
    for (std::size_t k = 0; k < K; ++k)
        if (k != c) traj.u(N, k) = tables.m(N, k) * traj.u(N, c) + tables.z(N, k);

    for (std::size_t n = N; n >= 2; --n) {
        const double uc = tables.m_tilde(n - 1, c) * traj.u(n, c) + tables.z_tilde(n - 1, c);
        traj.u(n - 1, c) = uc;
        for (std::size_t k = 0; k < K; ++k)
            if (k != c) traj.u(n - 1, k) = tables.m(n - 1, k) * uc + tables.z(n - 1, k);
    }

    for (const auto& [j, value] : bc.fixed_initial()) traj.u(0, j) = value;
    traj.u(0, p) = tables.m(0, p) * traj.u(1, c) + tables.z_tilde(0, p);

    if (!traj.finite())
        throw SolverError(ErrorCode::Overflow, "backward substitution produced NaN or Inf");
    return traj;
}

/// Full linear solve: validate, forward sweep, backward substitution.
inline Trajectory solve_linear(const TimeGrid& grid, const LinearCoefficients& coeffs,
                               const BoundarySpec& bc) {
    validate(grid, coeffs, bc);
    const SweepTables tables = forward_sweep(coeffs, bc);
    return backward_substitute(grid, tables, coeffs, bc);
}

} // namespace sweepbvp
