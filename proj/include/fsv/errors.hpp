#pragma once

#include <stdexcept>
#include <string>

namespace fsv {

// Out-of-range model or kernel parameter.
struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Argument outside the domain of an operation (e.g. t <= 0 for a singular kernel).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RiccatiDivergence : NumericalError {
  using NumericalError::NumericalError;
};

struct FactorizationError : NumericalError {
  using NumericalError::NumericalError;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace fsv
