#pragma once

#include <stdexcept>
#include <string>

namespace sweepbvp {

enum class ErrorCode {
    DimensionMismatch,
    NonFinite,
    BadBoundarySpec,
    SingularPivot,
    SingularState,
    SingularSystem,
    Overflow,
    NotConverged,
    NoBracket,
};

inline const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::NonFinite: return "NonFinite";
        case ErrorCode::BadBoundarySpec: return "BadBoundarySpec";
        case ErrorCode::SingularPivot: return "SingularPivot";
        case ErrorCode::SingularState: return "SingularState";
        case ErrorCode::SingularSystem: return "SingularSystem";
        case ErrorCode::Overflow: return "Overflow";
        case ErrorCode::NotConverged: return "NotConverged";
        case ErrorCode::NoBracket: return "NoBracket";
    }
    return "Unknown";
}

/// Thrown by solver operations. `code()` identifies the failure class so
/// callers (and the CLI exit-code mapping) can dispatch without parsing text.
class SolverError : public std::runtime_error {
public:
    SolverError(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message),
          code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace sweepbvp
