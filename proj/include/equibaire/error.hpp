#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace equibaire {

/// Malformed input or an out-of-range parameter. `field()` names the offending input.
class InvalidArgument : public std::invalid_argument {
 public:
  InvalidArgument(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A well-formed input that lies outside an operation's domain,
/// e.g. asking for the fixed points of the identity.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The algebraic and dynamical routes of the flow verdict disagree.
/// Carries both sides serialized as JSON text so callers can surface them.
class BasisDisagreement : public std::runtime_error {
 public:
  BasisDisagreement(const std::string& message, std::string algebraic, std::string dynamical)
      : std::runtime_error(message),
        algebraic_(std::move(algebraic)),
        dynamical_(std::move(dynamical)) {}

  const std::string& algebraic() const noexcept { return algebraic_; }
  const std::string& dynamical() const noexcept { return dynamical_; }

 private:
  std::string algebraic_;
  std::string dynamical_;
};

}  // namespace equibaire
