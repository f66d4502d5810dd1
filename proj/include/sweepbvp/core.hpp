#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sweepbvp/errors.hpp"

namespace sweepbvp {

/// State at one time node: K components. Solver operations check finiteness
/// where it matters; the vector itself carries no hidden invariants.
using StateVector = std::vector<double>;

inline bool all_finite(std::span<const double> values) noexcept {
    return std::all_of(values.begin(), values.end(),
                       [](double v) { return std::isfinite(v); });
}

/// Component labels are 1-based everywhere a human sees them (config, CLI,
/// error text); storage and the library API are 0-based.
inline std::string component_label(std::size_t index) {
    return "u_" + std::to_string(index + 1);
}

/// Uniform time grid on [0, t_final] with n_steps intervals.
class TimeGrid {
public:
    TimeGrid(std::size_t n_steps, double t_final)
        : n_steps_(n_steps), t_final_(t_final), step_(t_final / static_cast<double>(n_steps)) {
        if (n_steps < 2)
            throw std::invalid_argument("TimeGrid: n_steps must be >= 2");
        if (!std::isfinite(t_final) || t_final <= 0.0)
            throw std::invalid_argument("TimeGrid: t_final must be finite and positive");
    }

    std::size_t n_steps() const noexcept { return n_steps_; }
    std::size_t n_nodes() const noexcept { return n_steps_ + 1; }
    double t_final() const noexcept { return t_final_; }
    double step() const noexcept { return step_; }
    double time(std::size_t n) const noexcept { return static_cast<double>(n) * step_; }

private:
    std::size_t n_steps_;
    double t_final_;
    double step_;
};

/// Coefficients of the linear difference system
///   u[n+1] = A_n u[n] + g_n,   n = 0..N-1,
/// stored dense: a(n,k,j) is the (k,j) entry of A_n, g(n,k) the k-th entry of g_n.
class LinearCoefficients {
public:
    LinearCoefficients(std::size_t n_steps, std::size_t dimension)
        : n_steps_(n_steps), dim_(dimension),
          a_(n_steps * dimension * dimension, 0.0),
          g_(n_steps * dimension, 0.0) {}

    std::size_t n_steps() const noexcept { return n_steps_; }
    std::size_t dimension() const noexcept { return dim_; }

    double& a(std::size_t n, std::size_t k, std::size_t j) noexcept {
        return a_[(n * dim_ + k) * dim_ + j];
    }
    double a(std::size_t n, std::size_t k, std::size_t j) const noexcept {
        return a_[(n * dim_ + k) * dim_ + j];
    }
    double& g(std::size_t n, std::size_t k) noexcept { return g_[n * dim_ + k]; }
    double g(std::size_t n, std::size_t k) const noexcept { return g_[n * dim_ + k]; }

    /// Row k of A_n as a contiguous span of length K.
    std::span<const double> a_row(std::size_t n, std::size_t k) const noexcept {
        return {a_.data() + (n * dim_ + k) * dim_, dim_};
    }
    std::span<const double> g_row(std::size_t n) const noexcept {
        return {g_.data() + n * dim_, dim_};
    }

    double max_abs_a(std::size_t n) const noexcept {
        double m = 0.0;
        const double* p = a_.data() + n * dim_ * dim_;
        for (std::size_t i = 0; i < dim_ * dim_; ++i) m = std::max(m, std::abs(p[i]));
        return m;
    }

    bool finite() const noexcept { return all_finite(a_) && all_finite(g_); }

private:
    std::size_t n_steps_;
    std::size_t dim_;
    std::vector<double> a_;
    std::vector<double> g_;
};

/// Two-point boundary data: K-1 components pinned at n=0, one component free
/// at n=0, and one component (which must also be pinned at n=0) prescribed at
/// n=N. Construction enforces the pattern; indices are 0-based here.
class BoundarySpec {
public:
    BoundarySpec(std::size_t dimension,
                 std::vector<std::pair<std::size_t, double>> fixed_initial,
                 std::size_t free_initial_index,
                 std::size_t terminal_index,
                 double terminal_value)
        : dim_(dimension), fixed_(std::move(fixed_initial)),
          free_index_(free_initial_index), terminal_index_(terminal_index),
          terminal_value_(terminal_value) {
        if (dim_ < 2)
            throw SolverError(ErrorCode::BadBoundarySpec, "dimension must be >= 2");
        if (free_index_ >= dim_)
            throw SolverError(ErrorCode::BadBoundarySpec,
                              "free initial component " + component_label(free_index_) +
                                  " out of range for dimension " + std::to_string(dim_));
        if (terminal_index_ >= dim_)
            throw SolverError(ErrorCode::BadBoundarySpec,
                              "terminal component " + component_label(terminal_index_) +
                                  " out of range for dimension " + std::to_string(dim_));
        if (fixed_.size() != dim_ - 1)
            throw SolverError(ErrorCode::BadBoundarySpec,
                              "expected " + std::to_string(dim_ - 1) +
                                  " fixed initial components, got " + std::to_string(fixed_.size()));
        std::sort(fixed_.begin(), fixed_.end());
        for (std::size_t i = 0; i < fixed_.size(); ++i) {
            auto [j, value] = fixed_[i];
            if (j >= dim_)
                throw SolverError(ErrorCode::BadBoundarySpec,
                                  "fixed initial component " + component_label(j) +
                                      " out of range for dimension " + std::to_string(dim_));
            if (i > 0 && fixed_[i - 1].first == j)
                throw SolverError(ErrorCode::BadBoundarySpec,
                                  "fixed initial component " + component_label(j) + " listed twice");
            if (j == free_index_)
                throw SolverError(ErrorCode::BadBoundarySpec,
                                  "free initial component " + component_label(j) +
                                      " also has a fixed initial value");
            if (!std::isfinite(value))
                throw SolverError(ErrorCode::NonFinite,
                                  "fixed initial value for " + component_label(j) + " is not finite");
        }
        if (terminal_index_ == free_index_)
            throw SolverError(ErrorCode::BadBoundarySpec,
                              "terminal component " + component_label(terminal_index_) +
                                  " must differ from the free initial component");
        if (!std::isfinite(terminal_value_))
            throw SolverError(ErrorCode::NonFinite, "terminal value is not finite");
    }

    std::size_t dimension() const noexcept { return dim_; }
    std::span<const std::pair<std::size_t, double>> fixed_initial() const noexcept {
        return fixed_;
    }
    std::size_t free_initial_index() const noexcept { return free_index_; }
    std::size_t terminal_index() const noexcept { return terminal_index_; }
    double terminal_value() const noexcept { return terminal_value_; }

    bool is_fixed(std::size_t j) const noexcept { return j != free_index_; }

    /// Pinned initial value of component j; j must not be the free component.
    double fixed_value(std::size_t j) const {
        for (const auto& [idx, value] : fixed_)
            if (idx == j) return value;
        throw SolverError(ErrorCode::BadBoundarySpec,
                          component_label(j) + " has no fixed initial value");
    }

private:
    std::size_t dim_;
    std::vector<std::pair<std::size_t, double>> fixed_;
    std::size_t free_index_;
    std::size_t terminal_index_;
    double terminal_value_;
};

/// Output of the forward pass of the sweep. For n >= 1 the tables encode
///   u_k[n]   = m(n,k) * u_c[n] + z(n,k)          (c = terminal component)
///   u_k[n-1] = m_tilde(n-1,k) * u_c[n] + z_tilde(n-1,k)
/// Row conventions: m(n,c) = 1 and z(n,c) = 0 for every n; row 0 of m holds
/// the seed coefficient m(0,p) relating the free component p at n=0 to
/// u_c[1] (its offset lives in z_tilde(0,p)); the other row-0 entries hold
/// the pinned initial values in z(0,j).
class SweepTables {
public:
    SweepTables(std::size_t n_steps, std::size_t dimension)
        : n_steps_(n_steps), dim_(dimension),
          m_((n_steps + 1) * dimension, 0.0), z_((n_steps + 1) * dimension, 0.0),
          mt_(n_steps * dimension, 0.0), zt_(n_steps * dimension, 0.0) {}

    std::size_t n_steps() const noexcept { return n_steps_; }
    std::size_t dimension() const noexcept { return dim_; }

    double& m(std::size_t n, std::size_t k) noexcept { return m_[n * dim_ + k]; }
    double m(std::size_t n, std::size_t k) const noexcept { return m_[n * dim_ + k]; }
    double& z(std::size_t n, std::size_t k) noexcept { return z_[n * dim_ + k]; }
    double z(std::size_t n, std::size_t k) const noexcept { return z_[n * dim_ + k]; }
    double& m_tilde(std::size_t n, std::size_t k) noexcept { return mt_[n * dim_ + k]; }
    double m_tilde(std::size_t n, std::size_t k) const noexcept { return mt_[n * dim_ + k]; }
    double& z_tilde(std::size_t n, std::size_t k) noexcept { return zt_[n * dim_ + k]; }
    double z_tilde(std::size_t n, std::size_t k) const noexcept { return zt_[n * dim_ + k]; }

    std::span<const double> m_row(std::size_t n) const noexcept {
        return {m_.data() + n * dim_, dim_};
    }
    std::span<const double> z_row(std::size_t n) const noexcept {
        return {z_.data() + n * dim_, dim_};
    }
    std::span<const double> m_tilde_row(std::size_t n) const noexcept {
        return {mt_.data() + n * dim_, dim_};
    }
    std::span<const double> z_tilde_row(std::size_t n) const noexcept {
        return {zt_.data() + n * dim_, dim_};
    }

    bool finite() const noexcept {
        return all_finite(m_) && all_finite(z_) && all_finite(mt_) && all_finite(zt_);
    }

private:
    std::size_t n_steps_;
    std::size_t dim_;
    std::vector<double> m_, z_, mt_, zt_;
};

/// Solved state sequence: (n_steps+1) rows of K components.
class Trajectory {
public:
    Trajectory(TimeGrid grid, std::size_t dimension)
        : grid_(grid), dim_(dimension), states_((grid.n_steps() + 1) * dimension, 0.0) {}

    const TimeGrid& grid() const noexcept { return grid_; }
    std::size_t dimension() const noexcept { return dim_; }
    std::size_t n_nodes() const noexcept { return grid_.n_steps() + 1; }

    double& u(std::size_t n, std::size_t k) noexcept { return states_[n * dim_ + k]; }
    double u(std::size_t n, std::size_t k) const noexcept { return states_[n * dim_ + k]; }

    std::span<double> row(std::size_t n) noexcept { return {states_.data() + n * dim_, dim_}; }
    std::span<const double> row(std::size_t n) const noexcept {
        return {states_.data() + n * dim_, dim_};
    }

    bool finite() const noexcept { return all_finite(states_); }

    double max_abs() const noexcept {
        double m = 0.0;
        for (double v : states_) m = std::max(m, std::abs(v));
        return m;
    }

private:
    TimeGrid grid_;
    std::size_t dim_;
    std::vector<double> states_;
};

/// View over a dimension-checked (grid, coefficients, boundary) triple.
/// Produced by validate(); holds references, so keep the inputs alive.
struct CheckedProblem {
    const TimeGrid& grid;
    const LinearCoefficients& coeffs;
    const BoundarySpec& bc;
};

/// Cross-checks dimensions and finiteness of a linear BVP instance.
/// BoundarySpec's own invariants hold by construction.
inline CheckedProblem validate(const TimeGrid& grid, const LinearCoefficients& coeffs,
                               const BoundarySpec& bc) {
    if (coeffs.n_steps() != grid.n_steps())
        throw SolverError(ErrorCode::DimensionMismatch,
                          "coefficient tensor has " + std::to_string(coeffs.n_steps()) +
                              " steps but the grid has " + std::to_string(grid.n_steps()));
    if (coeffs.dimension() != bc.dimension())
        throw SolverError(ErrorCode::DimensionMismatch,
                          "coefficients have dimension " + std::to_string(coeffs.dimension()) +
                              " but the boundary spec has " + std::to_string(bc.dimension()));
    if (!coeffs.finite())
        throw SolverError(ErrorCode::NonFinite, "coefficient tensor contains NaN or Inf");
    return CheckedProblem{grid, coeffs, bc};
}

} // namespace sweepbvp
