#pragma once

#include <stdexcept>
#include <string>

namespace strataflow {

enum class ErrorCode {
    Ok = 0,
    InvalidArgument,
    InvalidProfile,
    NoBedReached,
    NonMonotone,
    NoMinimumInRange,
    DegenerateDenominator,
    LBViolated,
    StagnationGuard,
    NoConvergence,
    SingularJacobian,
    StepFailure,
    MonitorStop,
    InvalidField,
    ParseError,
    IoError,
    Internal
};

const char* error_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
    throw Error(code, std::string(error_name(code)) + ": " + what);
}

}  // namespace strataflow
