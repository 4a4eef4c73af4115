#pragma once

#include <stdexcept>
#include <string>

namespace smoothop {

/// Raised when an operation receives an argument outside its mathematical domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised when a parameter bundle violates its construction invariants.
/// `field()` names the offending field so configuration front-ends can report it.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace smoothop
