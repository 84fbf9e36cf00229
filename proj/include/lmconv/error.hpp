#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lmconv {

enum class ErrorCode {
    QueryAfterExplosion,
    QueryBeyondHorizon,
    InvalidPath,
    DomainError,
    IntegrabilityError,
    CompensatorDiverges,
    JumpBelowMinusOne,
    NotNonnegative,
    RevivesAfterZero,
    InvalidParameters,
    UnknownPreset,
    OracleUnavailable,
    UnsupportedModel,
    UnknownExample,
    ConfigError,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace lmconv
