#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace faultloc {

enum class ErrorKind {
  kSchema,
  kParse,
  kDuplicate,
  kConfig,
  kPrecondition,
  kDimension,
  kVersion,
  kIo,
  kMissingArtifact,
  kEmptyVocabulary,
  kInvalidInput,
};

std::string_view to_string(ErrorKind kind);

// All failures raised by the library carry a kind so the CLI can emit a
// machine-readable error object.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace faultloc
