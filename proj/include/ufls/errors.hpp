#pragma once

#include <stdexcept>
#include <string>

namespace ufls {

// Error classes map 1:1 to CLI exit codes (see README).
enum class ErrorClass {
    Usage = 2,
    Config = 3,
    Data = 4,
    Simulation = 5,
    Training = 6,
    Encoding = 7,
    Verification = 8,
    Io = 9,
    Internal = 10,
};

class Error : public std::runtime_error {
public:
    Error(ErrorClass cls, std::string code, const std::string& message)
        : std::runtime_error(code + ": " + message), cls_(cls), code_(std::move(code)) {}

    ErrorClass error_class() const noexcept { return cls_; }
    // Stable machine-readable tag, e.g. "NoUnitsRemaining".
    const std::string& code() const noexcept { return code_; }
    int exit_code() const noexcept { return static_cast<int>(cls_); }

private:
    ErrorClass cls_;
    std::string code_;
};

} // namespace ufls
