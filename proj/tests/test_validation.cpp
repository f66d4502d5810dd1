#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "sweepbvp/sweep.hpp"
#include "sweepbvp/validation.hpp"

using namespace sweepbvp;
using testutil::solver_error_code;

namespace {

LinearCoefficients shift_system(std::size_t n_steps) {
    LinearCoefficients coeffs(n_steps, 4);
    for (std::size_t n = 0; n < n_steps; ++n) {
        for (std::size_t k = 0; k < 4; ++k) coeffs.a(n, k, k) = 1.0;
        coeffs.a(n, 0, 1) = 1.0;
    }
    return coeffs;
}

OdeProblem climb_problem(std::size_t n_steps, double hf) {
    const FlightModel model;
    return flight_problem(model, TimeGrid(n_steps, 40.0),
                          flight_boundary(0.0, 960.0, 0.0, hf));
}

} // namespace

TEST_CASE("relative max-norm difference") {
    Trajectory a(TimeGrid(2, 1.0), 1);
    Trajectory b(TimeGrid(2, 1.0), 1);
    a.u(1, 0) = 1.0;
    b.u(1, 0) = 1.0;
    a.u(2, 0) = 3.0;
    b.u(2, 0) = 1.0;
    CHECK(relative_max_norm_diff(a, b) == 1.0); // |3-1| / (1 + 1)
    CHECK(relative_max_norm_diff(b, b) == 0.0);

    const Trajectory c(TimeGrid(3, 1.0), 1);
    CHECK(solver_error_code([&] { relative_max_norm_diff(a, c); }) ==
          ErrorCode::DimensionMismatch);
}

TEST_CASE("dense oracle reproduces the hand trajectory") {
    const TimeGrid grid(2, 1.0);
    const BoundarySpec bc(4, {{0, 0.0}, {2, 0.0}, {3, 0.0}}, 1, 0, 2.0);
    const Trajectory traj = dense_oracle_solve(grid, shift_system(2), bc);
    CHECK(std::abs(traj.u(0, 0) - 0.0) <= 1e-12);
    CHECK(std::abs(traj.u(1, 0) - 1.0) <= 1e-12);
    CHECK(std::abs(traj.u(2, 0) - 2.0) <= 1e-12);
    for (std::size_t n = 0; n <= 2; ++n) CHECK(std::abs(traj.u(n, 1) - 1.0) <= 1e-12);
}

TEST_CASE("dense oracle agrees with the sweep on a random instance") {
    const RandomLinearInstance inst = random_linear_instance(46000, 20, 4);
    const Trajectory sweep = solve_linear(inst.grid, inst.coeffs, inst.bc);
    const Trajectory dense = dense_oracle_solve(inst.grid, inst.coeffs, inst.bc);
    CHECK(relative_max_norm_diff(sweep, dense) <= 1e-8);
}

TEST_CASE("the two solvers report a decoupled instance differently") {
    // Identity dynamics never propagate the free component into the terminal
    // one: the sweep sees a dead pivot, the dense solver a singular matrix.
    LinearCoefficients coeffs(2, 2);
    for (std::size_t n = 0; n < 2; ++n)
        for (std::size_t k = 0; k < 2; ++k) coeffs.a(n, k, k) = 1.0;
    const TimeGrid grid(2, 1.0);
    const BoundarySpec bc(2, {{0, 0.0}}, 1, 0, 1.0);
    CHECK(solver_error_code([&] { solve_linear(grid, coeffs, bc); }) ==
          ErrorCode::SingularPivot);
    CHECK(solver_error_code([&] { dense_oracle_solve(grid, coeffs, bc); }) ==
          ErrorCode::SingularSystem);
}

TEST_CASE("dense oracle refuses oversized systems") {
    const TimeGrid grid(2500, 1.0);
    const LinearCoefficients coeffs(2500, 2);
    const BoundarySpec bc(2, {{0, 0.0}}, 1, 0, 1.0);
    CHECK_THROWS_AS(dense_oracle_solve(grid, coeffs, bc), std::invalid_argument);
}

TEST_CASE("forward integration is the repeated Euler step") {
    const OdeProblem problem = climb_problem(50, 35000.0);
    const StateVector initial{0.0, 0.5, 960.0, 0.0};
    const Trajectory traj = integrate_forward(problem, initial);

    REQUIRE(traj.n_nodes() == 51);
    for (std::size_t k = 0; k < 4; ++k) CHECK(traj.u(0, k) == initial[k]);

    StateVector state = initial;
    for (std::size_t n = 0; n < 50; ++n) {
        state = euler_step_map(problem.rhs, state, problem.grid.step());
        for (std::size_t k = 0; k < 4; ++k) CHECK(traj.u(n + 1, k) == state[k]);
    }
}

TEST_CASE("shooting recovers the angle that generated the target") {
    const OdeProblem scratch = climb_problem(200, 35000.0);
    const Trajectory forward = integrate_forward(scratch, {0.0, 0.5, 960.0, 0.0});
    const double target = forward.u(200, kAltitude);

    const OdeProblem problem = climb_problem(200, target);
    const ShootingResult result = shooting_oracle(problem);
    CHECK(std::abs(result.free_initial_value - 0.5) <= 1e-9);
    CHECK(std::abs(result.trajectory.u(200, kAltitude) - target) <= 1e-6 * (1.0 + target));
    CHECK(result.trajectory.u(0, kPathAngle) == result.free_initial_value);
}

TEST_CASE("shooting reports an unreachable target") {
    const OdeProblem problem = climb_problem(100, 1e9);
    CHECK(solver_error_code([&] { shooting_oracle(problem); }) == ErrorCode::NoBracket);
}

TEST_CASE("shooting rejects bad settings") {
    const OdeProblem problem = climb_problem(100, 35000.0);
    CHECK_THROWS_AS(shooting_oracle(problem, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(shooting_oracle(problem, 1e-12, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("newton and shooting land on the same climb") {
    const FlightModel model;
    const NewtonShootingComparison cmp =
        compare_newton_shooting(model, 1000, 40.0, 0.0, 960.0, 0.0, 35000.0);
    CHECK(cmp.n_steps == 1000);
    REQUIRE(cmp.newton_converged);
    CHECK(cmp.gamma0_difference <= 1e-6);
    CHECK(cmp.trajectory_difference <= 1e-5);
    CHECK(std::abs(cmp.gamma0_newton - 1.202883832880035) <= 1e-9);
}

TEST_CASE("residual check on a solved linear instance") {
    const RandomLinearInstance inst = random_linear_instance(46021, 50, 4);
    Trajectory traj = solve_linear(inst.grid, inst.coeffs, inst.bc);

    const ResidualReport clean = check_residuals(traj, inst.coeffs, inst.bc);
    CHECK(clean.max_scaled_residual <= 1e-10);
    REQUIRE(clean.bc_residuals.size() == 3);
    for (double r : clean.bc_residuals) CHECK(r == 0.0);
    CHECK(clean.terminal_residual == 0.0);

    traj.u(1, 2) += 1.0;
    const ResidualReport broken = check_residuals(traj, inst.coeffs, inst.bc);
    CHECK(broken.max_recurrence_residual >= 0.5);
}

TEST_CASE("residual check on a converged climb") {
    const OdeProblem problem = climb_problem(1000, 35000.0);
    const SolveReport report = solve_nonlinear(problem, {}, default_initial_guess(problem));
    REQUIRE(report.converged);
    const ResidualReport residuals = check_residuals(report.trajectory, problem);
    CHECK(residuals.max_scaled_residual <= 1e-8);
    for (double r : residuals.bc_residuals) CHECK(r == 0.0);
    CHECK(residuals.terminal_residual <= 1e-6);
}

TEST_CASE("analytic jacobian passes the finite-difference audit") {
    const double worst = jacobian_fd_check(FlightParams{}, 1000, 46000);
    CHECK(worst <= 1e-6);
    CHECK(jacobian_fd_check(FlightParams{}, 1000, 46000) == worst);
}

TEST_CASE("a corrupted jacobian fails the audit") {
    CHECK(jacobian_fd_check_corrupted(FlightParams{}, 1000, 46000) > 1e-2);
}

TEST_CASE("random instances are seeded and in range") {
    const RandomLinearInstance first = random_linear_instance(99, 5, 3);
    const RandomLinearInstance again = random_linear_instance(99, 5, 3);
    const RandomLinearInstance other = random_linear_instance(100, 5, 3);

    bool any_difference = false;
    for (std::size_t n = 0; n < 5; ++n)
        for (std::size_t k = 0; k < 3; ++k) {
            CHECK(first.coeffs.g(n, k) == again.coeffs.g(n, k));
            if (first.coeffs.g(n, k) != other.coeffs.g(n, k)) any_difference = true;
            for (std::size_t j = 0; j < 3; ++j) {
                CHECK(first.coeffs.a(n, k, j) == again.coeffs.a(n, k, j));
                const double lo = (k == j) ? 0.0 : -1.0;
                const double hi = (k == j) ? 2.0 : 1.0;
                CHECK(first.coeffs.a(n, k, j) >= lo);
                CHECK(first.coeffs.a(n, k, j) <= hi);
            }
        }
    CHECK(any_difference);

    CHECK(first.bc.dimension() == 3);
    CHECK(first.bc.fixed_initial().size() == 2);
    CHECK(first.bc.free_initial_index() != first.bc.terminal_index());
    CHECK(first.bc.free_initial_index() == again.bc.free_initial_index());
    CHECK(first.bc.terminal_index() == again.bc.terminal_index());
}

TEST_CASE("sweep matches the dense oracle across the instance grid") {
    const OracleSuiteResult result = linear_oracle_suite(46000, 200);
    CHECK(result.compared + result.skipped == 200);
    CHECK(result.compared > 0);
    CHECK(result.worst_rel_error <= 1e-8);
}
