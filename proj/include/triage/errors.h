#pragma once

#include <stdexcept>
#include <string>

namespace triage {

// Broad failure classes. The CLI maps these onto process exit codes.
enum class ErrorKind {
  kIo,               // unreadable input, missing artifact
  kSchema,           // malformed record, bad artifact version, bad config
  kEmptyData,        // nothing left to work on after filtering
  kInvalidArgument,  // caller violated a precondition
  kInvariant,        // internal consistency check failed
};

class TriageError : public std::runtime_error {
 public:
  TriageError(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline const char* ToString(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kIo: return "io";
    case ErrorKind::kSchema: return "schema";
    case ErrorKind::kEmptyData: return "empty-data";
    case ErrorKind::kInvalidArgument: return "invalid-argument";
    case ErrorKind::kInvariant: return "invariant";
  }
  return "unknown";
}

}  // namespace triage
