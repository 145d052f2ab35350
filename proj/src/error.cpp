#include "cmctd/error.hpp"

namespace cmctd {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kParse: return "parse error";
    case ErrorKind::kContract: return "contract violation";
    case ErrorKind::kJunctionMismatch: return "junction mismatch";
    case ErrorKind::kSaturated: return "tree saturated";
    case ErrorKind::kDepthLimit: return "depth limit";
    case ErrorKind::kNoTask: return "no task";
    case ErrorKind::kCodecVersion: return "codec version mismatch";
    case ErrorKind::kMazeHashMismatch: return "maze hash mismatch";
    case ErrorKind::kMalformed: return "malformed document";
    case ErrorKind::kConfig: return "config error";
    case ErrorKind::kIo: return "io error";
  }
  return "error";
}

}  // namespace cmctd
