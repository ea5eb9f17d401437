#ifndef CLONERLAB_ERROR_HPP
#define CLONERLAB_ERROR_HPP

#include <stdexcept>
#include <string>

namespace clonerlab {

enum class ErrorCode {
    WrongLength,        // image file/buffer is not exactly 143,360 bytes
    WrongSectorLength,  // sector payload is not exactly 256 bytes
    BadTrackSector,     // track/sector outside 35x16 geometry
    BrokenChain,        // catalog link leaves valid track/sector bounds
    NotDos,             // operation requires a DOS 3.3 image
    AlreadyInfected,
    NotInfectable,
    NotInfected,
    NotBootable,
    NoDosResident,
    NoHandler,
    InvalidConfig,
    IoError,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

}  // namespace clonerlab

#endif
