#pragma once

#include <stdexcept>
#include <string>

namespace oodkit {

// Every failure raised by the toolkit carries a short machine-readable code
// (e.g. "size_mismatch", "kind_mismatch") next to the human message. The CLI
// turns these into single-line JSON diagnostics.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

}  // namespace oodkit
