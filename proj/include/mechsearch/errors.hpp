#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mechsearch {

enum class ErrorCode {
    ZeroAreaRaster,
    UnknownObject,
    OutOfBounds,
    InvalidShape,
    BinOverflow,
    EmptyScene,
    InvalidPlan,
    StartCollision,
    EmptyMask,
    NoFreeSpace,
    InvalidConfig,
    IoError,
    BadSnapshot,
    BadRecord,
    SessionFinished,
    ConcurrentStep,
    UnknownSession,
    BadRequest,
};

std::string_view to_string(ErrorCode code);

/// Every failure the library reports carries one of the codes above so callers
/// (CLI, HTTP layer, tests) can branch without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace mechsearch
