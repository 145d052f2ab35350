#pragma once

#include <stdexcept>
#include <string>

namespace cmctd {

enum class ErrorKind {
  kParse,
  kContract,
  kJunctionMismatch,
  kSaturated,
  kDepthLimit,
  kNoTask,
  kCodecVersion,
  kMazeHashMismatch,
  kMalformed,
  kConfig,
  kIo,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace cmctd
