#include "mechsearch/errors.hpp"

namespace mechsearch {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::ZeroAreaRaster: return "ZeroAreaRaster";
        case ErrorCode::UnknownObject: return "UnknownObject";
        case ErrorCode::OutOfBounds: return "OutOfBounds";
        case ErrorCode::InvalidShape: return "InvalidShape";
        case ErrorCode::BinOverflow: return "BinOverflow";
        case ErrorCode::EmptyScene: return "EmptyScene";
        case ErrorCode::InvalidPlan: return "InvalidPlan";
        case ErrorCode::StartCollision: return "StartCollision";
        case ErrorCode::EmptyMask: return "EmptyMask";
        case ErrorCode::NoFreeSpace: return "NoFreeSpace";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::BadSnapshot: return "BadSnapshot";
        case ErrorCode::BadRecord: return "BadRecord";
        case ErrorCode::SessionFinished: return "SessionFinished";
        case ErrorCode::ConcurrentStep: return "ConcurrentStep";
        case ErrorCode::UnknownSession: return "UnknownSession";
        case ErrorCode::BadRequest: return "BadRequest";
    }
    return "Unknown";
}

}  // namespace mechsearch
