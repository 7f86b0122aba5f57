#pragma once

#include <stdexcept>
#include <string>

namespace qme {

/// Input outside the mathematical domain of an operation (odd N for a Neel
/// state, N < 2 for the Kac norm, non-Hermitian generator, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Requested problem exceeds a configured size cap.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical result violates an invariant beyond tolerance.
class ConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid or incomplete configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qme
