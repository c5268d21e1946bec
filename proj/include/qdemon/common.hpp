#pragma once

#include <stdexcept>
#include <string>

namespace qdemon {

// A demon broke the capture/erase discipline of its memory register.
class protocol_violation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// An estimator could not be formed from the data (e.g. an empty CHSH cell).
class insufficient_data : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A spec failed validation; the message lists the offending fields.
class validation_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tolerance for algebraic identities (normalization, Hermiticity, eigen-equations).
inline constexpr double kAlgebraTol = 1e-12;
// Tolerance for accumulated expectation values.
inline constexpr double kExpectationTol = 1e-10;
// Born probabilities this close to 0 or 1 are rounded to the endpoint, so
// measuring an eigenstate along its own axis is deterministic under roundoff.
inline constexpr double kProbSnapTol = 1e-12;
// Smallest admissible eigenvalue of a density operator.
inline constexpr double kPsdTol = -1e-10;

}  // namespace qdemon
