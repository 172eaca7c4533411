#include "slicenet/error.hpp"

namespace slicenet {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::UnsupportedDatatype: return "UnsupportedDatatype";
    case ErrorCode::TruncatedData: return "TruncatedData";
    case ErrorCode::NonVolumetric: return "NonVolumetric";
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::DuplicateSubject: return "DuplicateSubject";
    case ErrorCode::CdrOutOfRange: return "CdrOutOfRange";
    case ErrorCode::DegenerateRange: return "DegenerateRange";
    case ErrorCode::EmptyVolume: return "EmptyVolume";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::BadLabel: return "BadLabel";
    case ErrorCode::VersionUnsupported: return "VersionUnsupported";
    case ErrorCode::DuplicateName: return "DuplicateName";
    case ErrorCode::MissingTensor: return "MissingTensor";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::TooFewUnits: return "TooFewUnits";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::Empty: return "Empty";
    case ErrorCode::DegenerateFold: return "DegenerateFold";
    case ErrorCode::BadParams: return "BadParams";
    case ErrorCode::MalformedReport: return "MalformedReport";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace slicenet
