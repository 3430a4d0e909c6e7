#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gflame {

/// Failure categories shared by every solver and by the CLI error column.
enum class ErrorKind {
    InvalidArgument,
    NonConvergence,
    CFLViolation,
    DiffusionTooSmall,
    InvalidModelParams,
    DegenerateProfile,
    InvalidP,
    SingularProblem,
    InsufficientData,
    MissingColumn,
    ConfigError,
    PartialFailure,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Three significant digits for numbers in error messages.
inline std::string message_number(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", x);
    return buf;
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace gflame
