#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace subsel {

enum class ErrorCode {
    // numeric
    NotPositiveDefinite,
    ConvergenceFailure,
    // input / validation
    ParseError,
    DuplicateId,
    EmptyInput,
    UnknownId,
    OverlapError,
    SizeError,
    InvalidConfig,
    InvalidInitPop,
    UnknownCriterion,
    UnsupportedCriterion,
    MissingParameter,
    DuplicateName,
    ShadowingBuiltin,
    TooLarge,
    // evaluation time
    DegenerateTarget,
    MonomorphicData,
    DegenerateVariance,
    CriterionFailure,
};

std::string_view to_string(ErrorCode code) noexcept;

/// True for errors caused by bad user input (CLI exit status 2); everything
/// else is a runtime failure (exit status 1).
bool is_validation_error(ErrorCode code) noexcept;

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

} // namespace subsel
