#pragma once

#include <utility>

#include <catch2/catch_amalgamated.hpp>

#include "sweepbvp/errors.hpp"

namespace testutil {

/// Runs fn, requires that it throws SolverError, and returns the code.
template <typename Fn>
sweepbvp::ErrorCode solver_error_code(Fn&& fn) {
    try {
        std::forward<Fn>(fn)();
    } catch (const sweepbvp::SolverError& e) {
        return e.code();
    } catch (...) {
        FAIL("expected SolverError, got a different exception");
    }
    FAIL("expected SolverError, got no exception");
    return sweepbvp::ErrorCode::DimensionMismatch; // unreachable
}

} // namespace testutil
