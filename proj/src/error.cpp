#include "lmconv/error.hpp"

namespace lmconv {

std::string_view error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::QueryAfterExplosion: return "QueryAfterExplosion";
        case ErrorCode::QueryBeyondHorizon: return "QueryBeyondHorizon";
        case ErrorCode::InvalidPath: return "InvalidPath";
        case ErrorCode::DomainError: return "DomainError";
        case ErrorCode::IntegrabilityError: return "IntegrabilityError";
        case ErrorCode::CompensatorDiverges: return "CompensatorDiverges";
        case ErrorCode::JumpBelowMinusOne: return "JumpBelowMinusOne";
        case ErrorCode::NotNonnegative: return "NotNonnegative";
        case ErrorCode::RevivesAfterZero: return "RevivesAfterZero";
        case ErrorCode::InvalidParameters: return "InvalidParameters";
        case ErrorCode::UnknownPreset: return "UnknownPreset";
        case ErrorCode::OracleUnavailable: return "OracleUnavailable";
        case ErrorCode::UnsupportedModel: return "UnsupportedModel";
        case ErrorCode::UnknownExample: return "UnknownExample";
        case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace lmconv
