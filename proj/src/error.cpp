#include "subsel/error.hpp"

namespace subsel {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::UnknownId: return "UnknownId";
    case ErrorCode::OverlapError: return "OverlapError";
    case ErrorCode::SizeError: return "SizeError";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidInitPop: return "InvalidInitPop";
    case ErrorCode::UnknownCriterion: return "UnknownCriterion";
    case ErrorCode::UnsupportedCriterion: return "UnsupportedCriterion";
    case ErrorCode::MissingParameter: return "MissingParameter";
    case ErrorCode::DuplicateName: return "DuplicateName";
    case ErrorCode::ShadowingBuiltin: return "ShadowingBuiltin";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::DegenerateTarget: return "DegenerateTarget";
    case ErrorCode::MonomorphicData: return "MonomorphicData";
    case ErrorCode::DegenerateVariance: return "DegenerateVariance";
    case ErrorCode::CriterionFailure: return "CriterionFailure";
    }
    return "Unknown";
}

bool is_validation_error(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::ParseError:
    case ErrorCode::DuplicateId:
    case ErrorCode::EmptyInput:
    case ErrorCode::UnknownId:
    case ErrorCode::OverlapError:
    case ErrorCode::SizeError:
    case ErrorCode::InvalidConfig:
    case ErrorCode::InvalidInitPop:
    case ErrorCode::UnknownCriterion:
    case ErrorCode::UnsupportedCriterion:
    case ErrorCode::MissingParameter:
    case ErrorCode::DuplicateName:
    case ErrorCode::ShadowingBuiltin:
    case ErrorCode::TooLarge:
        return true;
    default:
        return false;
    }
}

} // namespace subsel
