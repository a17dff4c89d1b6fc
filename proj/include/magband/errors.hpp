#pragma once

#include <stdexcept>
#include <string>

namespace magband {

// Raised when a computation cannot certify its result on the current
// discretisation (admissibility, vanishing overlaps, unitarity loss).
// Callers may retry with a finer grid or more integration steps.
class RefinementRequired : public std::runtime_error {
 public:
  explicit RefinementRequired(const std::string& what) : std::runtime_error(what) {}
};

// Raised when inputs violate a numerical precondition that refinement
// cannot fix (non-Hermitian input, band crossing, singular formula).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace magband
