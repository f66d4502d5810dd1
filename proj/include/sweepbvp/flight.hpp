#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>

#include "sweepbvp/core.hpp"
#include "sweepbvp/errors.hpp"
#include "sweepbvp/newton.hpp"

namespace sweepbvp {

/// State component layout for the climb model.
inline constexpr std::size_t kAltitude = 0;  // h   [ft]
inline constexpr std::size_t kPathAngle = 1; // gamma [rad]
inline constexpr std::size_t kSpeed = 2;     // V   [ft/s]
inline constexpr std::size_t kRange = 3;     // x   [ft]
inline constexpr std::size_t kFlightDim = 4;

/// Below this |V| the 1/V terms in the path-angle equation are singular.
inline constexpr double kMinSpeed = 1e-8; // ft/s

/// Point-mass in-plane climb model parameters. British units throughout;
/// the mass constant is used literally in the force equations together with
/// g = 32 ft/s^2, without a slug/lbm conversion. The lift/drag polynomials
/// take the angle of attack in degrees; gamma and the thrust-line angle are
/// in radians. cl_factor/cd_factor multiply the whole polynomial; setting a
/// factor to 1 and scaling the constant coefficient reproduces the reading
/// where the factor applies to the constant term only.
struct FlightParams {
    double mass = 120000.0 * 2.2;            // lb
    double wing_area = 260.0 * 3.2 * 3.2;    // ft^2
    double alpha_deg = 12.0;                 // angle of attack, degrees
    double thrust_line_angle = 0.19;         // rad
    double gravity = 32.0;                   // ft/s^2
    double sea_level_density = 0.00239;      // slug/ft^3
    double scale_height = 26600.0;           // ft
    std::array<double, 3> cl_coeffs = {-0.0005225, 0.003506, 0.1577}; // {quad, lin, const}
    double cl_factor = 4.5;
    std::array<double, 3> cd_coeffs = {0.0001432, 0.0058, 0.2204};
    double cd_factor = 1.8;
    double earth_radius = 2.09e7; // ft; carried for completeness, unused by the dynamics

    void check() const {
        if (mass <= 0.0 || wing_area <= 0.0 || sea_level_density <= 0.0 ||
            scale_height <= 0.0 || gravity <= 0.0)
            throw std::invalid_argument(
                "FlightParams: mass, wing_area, densities and gravity must be positive");
        if (cl_factor <= 0.0 || cd_factor <= 0.0)
            throw std::invalid_argument("FlightParams: cl_factor and cd_factor must be positive");
    }
};

class FlightModel;

/// Thrust as a function of state, with its partials so the Jacobian stays
/// analytic under a custom law. gradient returns {dT/dh, dT/dgamma, dT/dV, dT/dx}.
struct ThrustLaw {
    std::function<double(const FlightModel&, std::span<const double>)> value;
    std::function<std::array<double, 4>(const FlightModel&, std::span<const double>)> gradient;
};

/// In-plane climb dynamics
///   h'     = V sin(gamma)
///   gamma' = (T sin(e3) + L) / (m V) - (g / V) cos(gamma)
///   V'     = (T cos(e3) - D) / m - g sin(gamma)
///   x'     = V cos(gamma)
/// with exponential atmosphere and quadratic lift/drag polar. The default
/// thrust law T = D + m g sin(gamma) balances weight along the path, leaving
/// a slightly decelerating climb.
class FlightModel {
public:
    explicit FlightModel(FlightParams params = {}) : params_(params) { params_.check(); }

    FlightModel(FlightParams params, ThrustLaw thrust_law)
        : params_(params), thrust_law_(std::move(thrust_law)) {
        params_.check();
    }

    const FlightParams& params() const noexcept { return params_; }

    double air_density(double altitude) const noexcept {
        return params_.sea_level_density * std::exp(-altitude / params_.scale_height);
    }

    double lift_coefficient() const noexcept {
        const double a = params_.alpha_deg;
        const auto& c = params_.cl_coeffs;
        return params_.cl_factor * (c[0] * a * a + c[1] * a + c[2]);
    }

    double drag_coefficient() const noexcept {
        const double a = params_.alpha_deg;
        const auto& c = params_.cd_coeffs;
        return params_.cd_factor * (c[0] * a * a + c[1] * a + c[2]);
    }

    double lift(std::span<const double> u) const noexcept {
        return dynamic_pressure_area(u) * lift_coefficient();
    }

    double drag(std::span<const double> u) const noexcept {
        return dynamic_pressure_area(u) * drag_coefficient();
    }

    double thrust(std::span<const double> u) const {
        if (thrust_law_.value) return thrust_law_.value(*this, u);
        return drag(u) + params_.mass * params_.gravity * std::sin(u[kPathAngle]);
    }

    /// {d/dh, d/dgamma, d/dV, d/dx} of drag; lift_gradient is the same shape.
    std::array<double, 4> drag_gradient(std::span<const double> u) const noexcept {
        const double d = drag(u);
        return {-d / params_.scale_height, 0.0, 2.0 * d / u[kSpeed], 0.0};
    }

    std::array<double, 4> lift_gradient(std::span<const double> u) const noexcept {
        const double l = lift(u);
        return {-l / params_.scale_height, 0.0, 2.0 * l / u[kSpeed], 0.0};
    }

    std::array<double, 4> thrust_gradient(std::span<const double> u) const {
        if (thrust_law_.gradient) return thrust_law_.gradient(*this, u);
        auto grad = drag_gradient(u);
        grad[kPathAngle] += params_.mass * params_.gravity * std::cos(u[kPathAngle]);
        return grad;
    }

    /// Time derivatives of (h, gamma, V, x). Throws SingularState when |V|
    /// is at or below kMinSpeed.
    void rhs(std::span<const double> u, std::span<double> out) const {
        check_state(u);
        const double gamma = u[kPathAngle];
        const double speed = u[kSpeed];
        const double sin_g = std::sin(gamma);
        const double cos_g = std::cos(gamma);
        const double l = lift(u);
        const double d = drag(u);
        const double t = thrust_from(d, sin_g, u);
        const auto& p = params_;
        out[kAltitude] = speed * sin_g;
        out[kPathAngle] =
            (t * std::sin(p.thrust_line_angle) + l) / (p.mass * speed) - (p.gravity / speed) * cos_g;
        out[kSpeed] = (t * std::cos(p.thrust_line_angle) - d) / p.mass - p.gravity * sin_g;
        out[kRange] = speed * cos_g;
    }

    /// Analytic 4x4 Jacobian d f_k / d u_j, row-major into `out`. The range
    /// column is identically zero: nothing depends on x.
    void jacobian(std::span<const double> u, std::span<double> out) const {
        check_state(u);
        const double gamma = u[kPathAngle];
        const double speed = u[kSpeed];
        const double sin_g = std::sin(gamma);
        const double cos_g = std::cos(gamma);
        const auto& p = params_;
        const double sin_e = std::sin(p.thrust_line_angle);
        const double cos_e = std::cos(p.thrust_line_angle);

        const double l = lift(u);
        const double d = drag(u);
        const double t = thrust_from(d, sin_g, u);
        const auto dl = lift_gradient(u);
        const auto dd = drag_gradient(u);
        const auto dt = thrust_gradient(u);

        for (std::size_t i = 0; i < 16; ++i) out[i] = 0.0;

        out[kAltitude * 4 + kPathAngle] = speed * cos_g;
        out[kAltitude * 4 + kSpeed] = sin_g;

        // gamma' = A / (m V) - (g / V) cos(gamma),  A = T sin(e3) + L
        const double a_num = t * sin_e + l;
        for (std::size_t j = 0; j < 4; ++j)
            out[kPathAngle * 4 + j] = (dt[j] * sin_e + dl[j]) / (p.mass * speed);
        out[kPathAngle * 4 + kPathAngle] += p.gravity * sin_g / speed;
        out[kPathAngle * 4 + kSpeed] +=
            -a_num / (p.mass * speed * speed) + p.gravity * cos_g / (speed * speed);

        for (std::size_t j = 0; j < 4; ++j)
            out[kSpeed * 4 + j] = (dt[j] * cos_e - dd[j]) / p.mass;
        out[kSpeed * 4 + kPathAngle] += -p.gravity * cos_g;

        out[kRange * 4 + kPathAngle] = -speed * sin_g;
        out[kRange * 4 + kSpeed] = cos_g;
    }

private:
    double dynamic_pressure_area(std::span<const double> u) const noexcept {
        const double v = u[kSpeed];
        return 0.5 * air_density(u[kAltitude]) * v * v * params_.wing_area;
    }

    double thrust_from(double drag_value, double sin_gamma, std::span<const double> u) const {
        if (thrust_law_.value) return thrust_law_.value(*this, u);
        return drag_value + params_.mass * params_.gravity * sin_gamma;
    }

    void check_state(std::span<const double> u) const {
        if (u.size() != kFlightDim)
            throw SolverError(ErrorCode::DimensionMismatch,
                              "flight state must have 4 components, got " +
                                  std::to_string(u.size()));
        if (!all_finite(u))
            throw SolverError(ErrorCode::NonFinite, "flight state contains NaN or Inf");
        if (std::abs(u[kSpeed]) <= kMinSpeed)
            throw SolverError(ErrorCode::SingularState,
                              "|" + component_label(kSpeed) + "| <= 1e-8 ft/s; the path-angle "
                              "equation divides by the speed");
    }

    FlightParams params_;
    ThrustLaw thrust_law_;
};

/// Boundary pattern of the climb problem: h, V, x pinned at t=0, gamma free,
/// h prescribed at t_f.
inline BoundarySpec flight_boundary(double h0, double v0, double x0, double hf) {
    return BoundarySpec(kFlightDim,
                        {{kAltitude, h0}, {kSpeed, v0}, {kRange, x0}},
                        kPathAngle, kAltitude, hf);
}

/// Packages the climb model for the Newton driver. The model is captured by
/// value so the problem outlives its source.
inline OdeProblem flight_problem(const FlightModel& model, const TimeGrid& grid,
                                 const BoundarySpec& bc) {
    if (bc.dimension() != kFlightDim)
        throw SolverError(ErrorCode::DimensionMismatch,
                          "boundary spec dimension must be 4 for the climb model");
    return OdeProblem{
        .dimension = kFlightDim,
        .rhs = [model](std::span<const double> u, std::span<double> out) { model.rhs(u, out); },
        .jacobian =
            [model](std::span<const double> u, std::span<double> out) { model.jacobian(u, out); },
        .grid = grid,
        .bc = bc,
    };
}

} // namespace sweepbvp
