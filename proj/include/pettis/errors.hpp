#pragma once

#include <stdexcept>

namespace pettis {

// Caller violated a precondition: dimension mismatch, off-grid time, bad config.
struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Parameter outside the mathematical domain of a formula.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// Overflow or non-finite value in a numeric computation.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A pairing vector is not realized by any single element within tolerance,
// i.e. the weak-integral consistency property fails numerically.
struct PettisPropertyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// No scalar function r(t) links the given drift and diffusion fields.
struct NoValidRError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Requested statistic is outside the closed-form conditional catalog.
struct UnsupportedStatisticError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace pettis
