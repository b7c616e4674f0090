#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace footnav {

enum class ErrorCode {
    NonMonotonicTime,
    GapTooLarge,
    NotStationary,
    NotRotation,
    LengthMismatch,
    EmptyWindow,
    DivergedFilter,
    SingularPrediction,
    EmptyPath,
    OutOfRange,
    StepOffGrid,
    MalformedFolderName,
    MissingReference,
    ColumnCountMismatch,
    NonMonotonicTimestamps,
    MissingSyncKey,
    IoFailure,
    InfeasibleGait,
    NoStandstill,
    TooShort,
    InvalidConfig,
};

constexpr std::string_view error_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::NonMonotonicTime: return "NonMonotonicTime";
        case ErrorCode::GapTooLarge: return "GapTooLarge";
        case ErrorCode::NotStationary: return "NotStationary";
        case ErrorCode::NotRotation: return "NotRotation";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::EmptyWindow: return "EmptyWindow";
        case ErrorCode::DivergedFilter: return "DivergedFilter";
        case ErrorCode::SingularPrediction: return "SingularPrediction";
        case ErrorCode::EmptyPath: return "EmptyPath";
        case ErrorCode::OutOfRange: return "OutOfRange";
        case ErrorCode::StepOffGrid: return "StepOffGrid";
        case ErrorCode::MalformedFolderName: return "MalformedFolderName";
        case ErrorCode::MissingReference: return "MissingReference";
        case ErrorCode::ColumnCountMismatch: return "ColumnCountMismatch";
        case ErrorCode::NonMonotonicTimestamps: return "NonMonotonicTimestamps";
        case ErrorCode::MissingSyncKey: return "MissingSyncKey";
        case ErrorCode::IoFailure: return "IoFailure";
        case ErrorCode::InfeasibleGait: return "InfeasibleGait";
        case ErrorCode::NoStandstill: return "NoStandstill";
        case ErrorCode::TooShort: return "TooShort";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
    }
    return "Unknown";
}

/// Every failure in the library is reported through this exception. The
/// message always starts with the error name so that CLI output can be
/// grepped for it.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail)
        : std::runtime_error(std::string(error_name(code)) + ": " + detail), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace footnav
