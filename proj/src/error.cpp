#include "pbetc/error.hpp"

namespace pbetc {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidGrid: return "InvalidGrid";
        case ErrorCode::GridMismatch: return "GridMismatch";
        case ErrorCode::ZeroPivot: return "ZeroPivot";
        case ErrorCode::SolverFailure: return "SolverFailure";
        case ErrorCode::AssumptionViolated: return "AssumptionViolated";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::BadSigma: return "BadSigma";
        case ErrorCode::InvalidBKappa: return "InvalidBKappa";
        case ErrorCode::NonPositiveB: return "NonPositiveB";
        case ErrorCode::HTooLarge: return "HTooLarge";
        case ErrorCode::EtaTooLarge: return "EtaTooLarge";
        case ErrorCode::NonPositiveM: return "NonPositiveM";
        case ErrorCode::OffGridCall: return "OffGridCall";
        case ErrorCode::LambdaZero: return "LambdaZero";
        case ErrorCode::BarrierBreach: return "BarrierBreach";
        case ErrorCode::EmptyLog: return "EmptyLog";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::ValidationError: return "ValidationError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace pbetc
