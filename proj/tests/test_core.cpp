#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "sweepbvp/core.hpp"

using namespace sweepbvp;
using testutil::solver_error_code;

namespace {

BoundarySpec climb_pattern(double hf = 35000.0) {
    return BoundarySpec(4, {{0, 0.0}, {2, 960.0}, {3, 0.0}}, 1, 0, hf);
}

} // namespace

TEST_CASE("TimeGrid basics") {
    const TimeGrid grid(10000, 40.0);
    CHECK(grid.n_steps() == 10000);
    CHECK(grid.n_nodes() == 10001);
    CHECK(grid.t_final() == 40.0);
    CHECK(grid.step() == 40.0 / 10000.0);
    CHECK(grid.time(0) == 0.0);
    CHECK(grid.time(2) == 2.0 * grid.step());
}

TEST_CASE("TimeGrid reproduces t_final from its step") {
    for (const auto& [n, tf] : std::vector<std::pair<std::size_t, double>>{
             {2, 1.0}, {3, 40.0}, {7, 0.31}, {10000, 40.0}, {999, 123.456}}) {
        const TimeGrid grid(n, tf);
        const double recon = grid.step() * static_cast<double>(n);
        CHECK(std::abs(recon - tf) <= 1e-15 * tf);
    }
}

TEST_CASE("TimeGrid rejects degenerate inputs") {
    CHECK_THROWS_AS(TimeGrid(1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(TimeGrid(0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(TimeGrid(10, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(TimeGrid(10, -4.0), std::invalid_argument);
    CHECK_THROWS_AS(TimeGrid(10, std::numeric_limits<double>::quiet_NaN()),
                    std::invalid_argument);
    CHECK_THROWS_AS(TimeGrid(10, std::numeric_limits<double>::infinity()),
                    std::invalid_argument);
}

TEST_CASE("component labels are 1-based") {
    CHECK(component_label(0) == "u_1");
    CHECK(component_label(1) == "u_2");
    CHECK(component_label(3) == "u_4");
}

TEST_CASE("all_finite flags NaN and Inf") {
    CHECK(all_finite(std::vector<double>{0.0, -1.5, 1e300}));
    CHECK_FALSE(all_finite(std::vector<double>{0.0, std::numeric_limits<double>::quiet_NaN()}));
    CHECK_FALSE(all_finite(std::vector<double>{std::numeric_limits<double>::infinity()}));
    CHECK(all_finite(std::vector<double>{}));
}

TEST_CASE("LinearCoefficients storage round-trips") {
    LinearCoefficients coeffs(3, 2);
    CHECK(coeffs.n_steps() == 3);
    CHECK(coeffs.dimension() == 2);
    CHECK(coeffs.a(2, 1, 0) == 0.0);
    CHECK(coeffs.finite());

    coeffs.a(1, 0, 1) = 2.5;
    coeffs.g(1, 1) = -3.0;
    CHECK(coeffs.a(1, 0, 1) == 2.5);
    CHECK(coeffs.g(1, 1) == -3.0);
    CHECK(coeffs.a_row(1, 0)[1] == 2.5);
    CHECK(coeffs.g_row(1)[1] == -3.0);
    CHECK(coeffs.max_abs_a(1) == 2.5);
    CHECK(coeffs.max_abs_a(0) == 0.0);

    coeffs.g(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_FALSE(coeffs.finite());
}

TEST_CASE("BoundarySpec accepts the climb pattern") {
    const BoundarySpec bc = climb_pattern();
    CHECK(bc.dimension() == 4);
    CHECK(bc.free_initial_index() == 1);
    CHECK(bc.terminal_index() == 0);
    CHECK(bc.terminal_value() == 35000.0);
    REQUIRE(bc.fixed_initial().size() == 3);
    CHECK(bc.fixed_initial()[0] == std::pair<std::size_t, double>{0, 0.0});
    CHECK(bc.fixed_initial()[1] == std::pair<std::size_t, double>{2, 960.0});
    CHECK(bc.fixed_initial()[2] == std::pair<std::size_t, double>{3, 0.0});
    CHECK(bc.is_fixed(0));
    CHECK_FALSE(bc.is_fixed(1));
    CHECK(bc.fixed_value(2) == 960.0);
    CHECK_THROWS_AS(bc.fixed_value(1), SolverError);
}

TEST_CASE("BoundarySpec sorts fixed entries by index") {
    const BoundarySpec bc(3, {{2, 7.0}, {0, -1.0}}, 1, 0, 0.5);
    CHECK(bc.fixed_initial()[0].first == 0);
    CHECK(bc.fixed_initial()[1].first == 2);
}

TEST_CASE("BoundarySpec rejects malformed patterns") {
    // free component also pinned
    CHECK(solver_error_code([] {
        BoundarySpec(4, {{0, 0.0}, {1, 1.0}, {3, 0.0}}, 1, 0, 1.0);
    }) == ErrorCode::BadBoundarySpec);
    // wrong number of fixed values
    CHECK(solver_error_code([] { BoundarySpec(4, {{0, 0.0}, {2, 0.0}}, 1, 0, 1.0); }) ==
          ErrorCode::BadBoundarySpec);
    // duplicate fixed index
    CHECK(solver_error_code([] {
        BoundarySpec(4, {{0, 0.0}, {0, 1.0}, {3, 0.0}}, 1, 2, 1.0);
    }) == ErrorCode::BadBoundarySpec);
    // out-of-range indices
    CHECK(solver_error_code([] { BoundarySpec(4, {{0, 0.0}, {2, 0.0}, {4, 0.0}}, 1, 0, 1.0); }) ==
          ErrorCode::BadBoundarySpec);
    CHECK(solver_error_code([] { BoundarySpec(4, {{0, 0.0}, {2, 0.0}, {3, 0.0}}, 4, 0, 1.0); }) ==
          ErrorCode::BadBoundarySpec);
    CHECK(solver_error_code([] { BoundarySpec(4, {{0, 0.0}, {2, 0.0}, {3, 0.0}}, 1, 4, 1.0); }) ==
          ErrorCode::BadBoundarySpec);
    // terminal component must carry a fixed initial value, i.e. not be free
    CHECK(solver_error_code([] { BoundarySpec(4, {{0, 0.0}, {2, 0.0}, {3, 0.0}}, 1, 1, 1.0); }) ==
          ErrorCode::BadBoundarySpec);
    // dimension too small for the one-free-one-terminal pattern
    CHECK(solver_error_code([] { BoundarySpec(1, {}, 0, 0, 1.0); }) ==
          ErrorCode::BadBoundarySpec);
    // non-finite values
    CHECK(solver_error_code([] {
        BoundarySpec(4, {{0, std::numeric_limits<double>::quiet_NaN()}, {2, 0.0}, {3, 0.0}}, 1,
                     0, 1.0);
    }) == ErrorCode::NonFinite);
    CHECK(solver_error_code([] {
        BoundarySpec(4, {{0, 0.0}, {2, 0.0}, {3, 0.0}}, 1, 0,
                     std::numeric_limits<double>::infinity());
    }) == ErrorCode::NonFinite);
}

TEST_CASE("SweepTables zero-initialized and finite") {
    SweepTables tables(5, 3);
    CHECK(tables.n_steps() == 5);
    CHECK(tables.dimension() == 3);
    CHECK(tables.m(5, 2) == 0.0);
    CHECK(tables.m_tilde(4, 0) == 0.0);
    CHECK(tables.finite());
    tables.z_tilde(0, 1) = std::numeric_limits<double>::infinity();
    CHECK_FALSE(tables.finite());
}

TEST_CASE("Trajectory storage and norms") {
    Trajectory traj(TimeGrid(2, 40.0), 4);
    CHECK(traj.n_nodes() == 3);
    CHECK(traj.dimension() == 4);
    CHECK(traj.grid().time(1) == 20.0);
    traj.u(1, 2) = -7.5;
    CHECK(traj.row(1)[2] == -7.5);
    CHECK(traj.max_abs() == 7.5);
    CHECK(traj.finite());
    traj.u(2, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_FALSE(traj.finite());
}

TEST_CASE("validate accepts a consistent instance") {
    const TimeGrid grid(2, 1.0);
    LinearCoefficients coeffs(2, 4);
    for (std::size_t n = 0; n < 2; ++n)
        for (std::size_t k = 0; k < 4; ++k) coeffs.a(n, k, k) = 1.0;
    coeffs.a(0, 0, 1) = 1.0;
    const BoundarySpec bc = climb_pattern();
    const CheckedProblem checked = validate(grid, coeffs, bc);
    CHECK(&checked.coeffs == &coeffs);
}

TEST_CASE("validate rejects mismatched or non-finite instances") {
    const TimeGrid grid(2, 1.0);
    const BoundarySpec bc = climb_pattern();

    CHECK(solver_error_code([&] { validate(grid, LinearCoefficients(3, 4), bc); }) ==
          ErrorCode::DimensionMismatch);
    CHECK(solver_error_code([&] { validate(grid, LinearCoefficients(2, 3), bc); }) ==
          ErrorCode::DimensionMismatch);

    LinearCoefficients bad(2, 4);
    bad.a(1, 2, 2) = std::numeric_limits<double>::quiet_NaN();
    CHECK(solver_error_code([&] { validate(grid, bad, bc); }) == ErrorCode::NonFinite);
}
