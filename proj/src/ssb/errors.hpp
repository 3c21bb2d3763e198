#pragma once

#include <stdexcept>
#include <string>

namespace ssb {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// corrupt header / malformed payload
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// file ends before the payload announced by its header
struct TruncationError : FormatError {
  using FormatError::FormatError;
};

// file is well-formed but written by an unsupported format version
struct VersionError : FormatError {
  using FormatError::FormatError;
};

}  // namespace ssb
