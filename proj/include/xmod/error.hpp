#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace xmod {

/// Every validation failure carries a stable machine-readable code
/// (e.g. "NonAssociative", "Axiom1Violation") plus a human-readable
/// witness description.
class Error : public std::runtime_error {
public:
  Error(std::string code, const std::string& detail)
      : std::runtime_error(code + ": " + detail), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

private:
  std::string code_;
};

[[noreturn]] inline void fail(const std::string& code, const std::string& detail) {
  throw Error(code, detail);
}

}  // namespace xmod
