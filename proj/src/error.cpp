#include "clonerlab/error.hpp"

namespace clonerlab {

const char* error_code_name(ErrorCode code)
{
    switch (code) {
        case ErrorCode::WrongLength: return "WrongLength";
        case ErrorCode::WrongSectorLength: return "WrongSectorLength";
        case ErrorCode::BadTrackSector: return "BadTrackSector";
        case ErrorCode::BrokenChain: return "BrokenChain";
        case ErrorCode::NotDos: return "NotDos";
        case ErrorCode::AlreadyInfected: return "AlreadyInfected";
        case ErrorCode::NotInfectable: return "NotInfectable";
        case ErrorCode::NotInfected: return "NotInfected";
        case ErrorCode::NotBootable: return "NotBootable";
        case ErrorCode::NoDosResident: return "NoDosResident";
        case ErrorCode::NoHandler: return "NoHandler";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::IoError: return "IoError";
    }
    return "Error";
}

}  // namespace clonerlab
