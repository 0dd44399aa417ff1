#pragma once

#include <stdexcept>
#include <string>

namespace fraclife {

// Failure categories surfaced by the library.  Numerical routines throw;
// recoverable conditions (ill-conditioning, integrable singularities) are
// reported through flags on return values instead.
enum class ErrorCode {
    NonSquare,
    SignPattern,
    RowSumViolation,
    Overflow,
    FallbackRequired,
    NonAnalytic,
    Singular,
    Unconverged,
    Diverged,
    HorizonBeforeT,
    QuadratureUnconverged,
    InconsistentConditioning,
    Unfundable,
    AllAbsorbed,
    TailExhausted,
    Parse,
    InvalidArgument,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline const char* error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::NonSquare: return "NonSquare";
        case ErrorCode::SignPattern: return "SignPattern";
        case ErrorCode::RowSumViolation: return "RowSumViolation";
        case ErrorCode::Overflow: return "Overflow";
        case ErrorCode::FallbackRequired: return "FallbackRequired";
        case ErrorCode::NonAnalytic: return "NonAnalytic";
        case ErrorCode::Singular: return "Singular";
        case ErrorCode::Unconverged: return "Unconverged";
        case ErrorCode::Diverged: return "Diverged";
        case ErrorCode::HorizonBeforeT: return "HorizonBeforeT";
        case ErrorCode::QuadratureUnconverged: return "QuadratureUnconverged";
        case ErrorCode::InconsistentConditioning: return "InconsistentConditioning";
        case ErrorCode::Unfundable: return "Unfundable";
        case ErrorCode::AllAbsorbed: return "AllAbsorbed";
        case ErrorCode::TailExhausted: return "TailExhausted";
        case ErrorCode::Parse: return "Parse";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

} // namespace fraclife
