#include "error.hpp"

namespace recoverbench {

const char* error_code_name(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::ok: return "ok";
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::validation: return "validation";
    case ErrorCode::parse: return "parse";
    case ErrorCode::io: return "io";
    case ErrorCode::range: return "range";
    case ErrorCode::degenerate: return "degenerate";
    case ErrorCode::numeric: return "numeric";
    case ErrorCode::internal: return "internal";
    }
    return "unknown";
}

} // namespace recoverbench
