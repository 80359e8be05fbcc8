#pragma once

#include <stdexcept>
#include <string>

namespace deepsad {

// Error categories mirrored by the C API status codes.
enum class ErrorCode {
  InvalidArgument = 1,
  Shape = 2,
  Io = 3,
  Format = 4,
  State = 5,
  Numeric = 6,
  Infeasible = 7,
  Metric = 8,
  Internal = 9,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) {
  throw Error(code, msg);
}

inline void require(bool cond, ErrorCode code, const std::string& msg) {
  if (!cond) fail(code, msg);
}

}  // namespace deepsad
