// Copyright 2026 The Unisep Authors.
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef UNISEP_ERROR_H_
#define UNISEP_ERROR_H_

#include <stdexcept>
#include <string>

namespace unisep {

enum class ErrorCode {
  kInvalidArgument,
  kShapeMismatch,
  kIoError,
  kUnreadableFile,
  kUnsupportedEncoding,
  kEmptyAudio,
  kRangeViolation,
  kNonFinite,
  kMissingGradient,
  kFormatError,
};

const char* ErrorCodeName(ErrorCode code);

// All library failures are reported through this exception type. The code
// lets callers distinguish failure classes without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kShapeMismatch: return "shape mismatch";
    case ErrorCode::kIoError: return "i/o error";
    case ErrorCode::kUnreadableFile: return "unreadable file";
    case ErrorCode::kUnsupportedEncoding: return "unsupported encoding";
    case ErrorCode::kEmptyAudio: return "empty audio";
    case ErrorCode::kRangeViolation: return "range violation";
    case ErrorCode::kNonFinite: return "non-finite value";
    case ErrorCode::kMissingGradient: return "missing gradient";
    case ErrorCode::kFormatError: return "format error";
  }
  return "error";
}

#define UNISEP_CHECK(cond, code, msg)               \
  do {                                              \
    if (!(cond)) throw ::unisep::Error((code), (msg)); \
  } while (0)

}  // namespace unisep

#endif  // UNISEP_ERROR_H_
