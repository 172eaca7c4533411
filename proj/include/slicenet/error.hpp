#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace slicenet {

/// Classified failure reasons surfaced by every module.
enum class ErrorCode {
  BadMagic,
  UnsupportedDatatype,
  TruncatedData,
  NonVolumetric,
  MalformedLine,
  DuplicateSubject,
  CdrOutOfRange,
  DegenerateRange,
  EmptyVolume,
  ShapeMismatch,
  NonFinite,
  BadLabel,
  VersionUnsupported,
  DuplicateName,
  MissingTensor,
  EmptyDataset,
  TooFewUnits,
  LengthMismatch,
  Empty,
  DegenerateFold,
  BadParams,
  MalformedReport,
  BadConfig,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace slicenet
