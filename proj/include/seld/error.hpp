#pragma once

#include <stdexcept>
#include <string>

namespace seld {

struct SeldError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidArgument : SeldError {
  using SeldError::SeldError;
};

// Direction cannot be recovered (near-zero vector, antipodal cancellation).
struct DegenerateDirection : SeldError {
  using SeldError::SeldError;
};

struct FormatError : SeldError {
  using SeldError::SeldError;
};

struct ConfigMismatch : SeldError {
  using SeldError::SeldError;
};

struct ValidationError : SeldError {
  using SeldError::SeldError;
};

struct GenerationError : SeldError {
  using SeldError::SeldError;
};

struct DecodeError : SeldError {
  using SeldError::SeldError;
};

}  // namespace seld
