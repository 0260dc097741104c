#pragma once

#include <stdexcept>
#include <string>

namespace cocoaug {

enum class ErrorKind {
  MalformedJson,
  MissingField,
  DuplicateId,
  DanglingReference,
  OutOfBoundsBox,
  InvalidBox,
  ScoreOutOfRange,
  InvalidCropSize,
  CategoryMismatch,
  MixedImageIds,
  WeightMismatch,
  UnsupportedImage,
  MissingSourceImage,
  InvalidConfig,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedJson: return "MalformedJson";
    case ErrorKind::MissingField: return "MissingField";
    case ErrorKind::DuplicateId: return "DuplicateId";
    case ErrorKind::DanglingReference: return "DanglingReference";
    case ErrorKind::OutOfBoundsBox: return "OutOfBoundsBox";
    case ErrorKind::InvalidBox: return "InvalidBox";
    case ErrorKind::ScoreOutOfRange: return "ScoreOutOfRange";
    case ErrorKind::InvalidCropSize: return "InvalidCropSize";
    case ErrorKind::CategoryMismatch: return "CategoryMismatch";
    case ErrorKind::MixedImageIds: return "MixedImageIds";
    case ErrorKind::WeightMismatch: return "WeightMismatch";
    case ErrorKind::UnsupportedImage: return "UnsupportedImage";
    case ErrorKind::MissingSourceImage: return "MissingSourceImage";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

/// Raised when input data violates a format or domain invariant.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised when a file cannot be read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cocoaug
