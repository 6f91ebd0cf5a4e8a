#pragma once

#include <stdexcept>
#include <string>

namespace recoverbench {

// Mirrors rb_status in the public C header; values must stay in sync.
enum class ErrorCode : int {
    ok = 0,
    invalid_argument = 1,
    validation = 2,
    parse = 3,
    io = 4,
    range = 5,
    degenerate = 6,
    numeric = 7,
    internal = 8,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
    throw Error(code, what);
}

inline void require(bool condition, ErrorCode code, const std::string& what) {
    if (!condition) throw Error(code, what);
}

} // namespace recoverbench
