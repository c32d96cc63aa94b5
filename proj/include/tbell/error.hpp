#pragma once

#include <stdexcept>
#include <string>

namespace tbell {

enum class ErrorCode {
    invalid_argument = 1,
    parse = 2,
    io = 3,
    undefined = 4,
    internal = 5,
};

/// Exception type thrown by every tbell component. The C API maps `code`
/// onto its status enum.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void throw_invalid(const std::string& what) {
    throw Error(ErrorCode::invalid_argument, what);
}

}  // namespace tbell
