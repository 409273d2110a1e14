#pragma once

#include <stdexcept>
#include <string>

namespace stabcert {

// Error categories. The numeric values are part of the C API (stabcert.h).
enum class ErrorCode : int {
  kInvalidArgument = 1,
  kDomainMismatch = 2,
  kNumerical = 3,
  kResolution = 4,
  kAlreadyStable = 5,
  kSingularGram = 6,
  kInstability = 7,
  kIo = 8,
  kUnverifiable = 9,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool condition, const std::string& what) {
  if (!condition) fail(ErrorCode::kInvalidArgument, what);
}

}  // namespace stabcert
