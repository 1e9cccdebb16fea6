#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace isospec {

enum class ErrorCode {
    DimensionMismatch,
    UnknownName,
    NonFiniteState,
    OutOfDomain,
    WindowTooCoarse,
    NotAnEigenvalue,
    ConditionViolated,
    IndexOutOfRange,
    SingularResolvent,
    GridMismatch,
    GridTooSmall,
    ParseError,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library; the code tells callers (and the CLI
/// exit-code mapping) which failure occurred.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace isospec
