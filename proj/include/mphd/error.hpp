#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mphd {

enum class ErrorCode {
    kInvalidArgument,
    kDimensionMismatch,
    kNumericalFailure,
    kDegenerateData,
    kDomain,
    kMalformed,
    kVersion,
    kSchema,
    kConfiguration,
    kExhaustedDomain,
    kIo,
};

std::string_view to_string(ErrorCode code);

/// Library-wide exception. The code is machine readable and maps onto CLI exit codes.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

    /// True for errors caused by bad input (exit status 1) rather than internal faults.
    bool is_user_error() const noexcept;

private:
    ErrorCode code_;
};

}  // namespace mphd
