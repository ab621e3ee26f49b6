#pragma once

#include <stdexcept>
#include <string>

namespace dtac {

// Mirrors the numeric codes exposed through the C API and the CLI exit codes.
enum class ErrorCode : int {
  Config = 1,
  Engine = 2,
  NoCertifiedStep = 3,
  SelfTest = 4,
  InvalidArgument = 5,
  Io = 6,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorCode::InvalidArgument, what);
}

}  // namespace dtac
