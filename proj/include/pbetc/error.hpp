#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pbetc {

enum class ErrorCode {
    InvalidGrid,
    GridMismatch,
    ZeroPivot,
    SolverFailure,
    AssumptionViolated,
    NoConvergence,
    BadSigma,
    InvalidBKappa,
    NonPositiveB,
    HTooLarge,
    EtaTooLarge,
    NonPositiveM,
    OffGridCall,
    LambdaZero,
    BarrierBreach,
    EmptyLog,
    ParseError,
    ValidationError,
    IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Single exception type for the library; the code tells callers (and the CLI
/// exit-code mapping) what went wrong.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace pbetc
