#pragma once

#include <stdexcept>
#include <string>

namespace wavesrc {

/// Invalid input: a violated precondition or a malformed configuration.
/// `field()` names the offending item ("noise.level", "grid", ...) when known.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what, std::string field = {})
      : std::invalid_argument(field.empty() ? what : field + ": " + what),
        field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A numerical procedure failed on otherwise valid input.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace wavesrc
