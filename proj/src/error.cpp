#include "polarsim/error.hpp"

namespace polarsim {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::ZeroVector: return "ZeroVector";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::ExactTooLarge: return "ExactTooLarge";
        case ErrorCode::DegenerateInput: return "DegenerateInput";
        case ErrorCode::InvalidLambda: return "InvalidLambda";
        case ErrorCode::RejectionStall: return "RejectionStall";
        case ErrorCode::EmptySeries: return "EmptySeries";
        case ErrorCode::TimeNotRecorded: return "TimeNotRecorded";
        case ErrorCode::NonPositiveValue: return "NonPositiveValue";
        case ErrorCode::ConfigInvalid: return "ConfigInvalid";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

}  // namespace polarsim
