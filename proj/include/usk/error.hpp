#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace usk {

enum class ErrorCode {
    RankDeficient,
    NotHermitian,
    Singular,
    PowerExceeded,
    NotInvertible,
    LengthMismatch,
    SingularScrambler,
    TooLarge,
    DomainError,
    InvalidRegime,
    ConfigError,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::Singular: return "Singular";
    case ErrorCode::PowerExceeded: return "PowerExceeded";
    case ErrorCode::NotInvertible: return "NotInvertible";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::SingularScrambler: return "SingularScrambler";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::InvalidRegime: return "InvalidRegime";
    case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

/// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace usk
