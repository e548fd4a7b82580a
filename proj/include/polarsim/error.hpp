#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace polarsim {

enum class ErrorCode {
    ZeroVector,
    DimensionMismatch,
    InvalidArgument,
    ExactTooLarge,
    DegenerateInput,
    InvalidLambda,
    RejectionStall,
    EmptySeries,
    TimeNotRecorded,
    NonPositiveValue,
    ConfigInvalid,
    IoError,
};

std::string_view to_string(ErrorCode code);

/// Every failure the library reports carries one of the codes above so that
/// callers (and the CLI exit-code mapping) can branch without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace polarsim
