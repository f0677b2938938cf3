#pragma once

#include <stdexcept>

namespace occ {

/// Argument vectors or families whose dimension disagrees with the model.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Family or model parameters outside their admissible range.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Problem size beyond what an exact (enumerative) engine accepts.
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Discretisation step too large for the rates of a spin system.
class AdmissibilityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A pattern reaches beyond the horizon of a computed schedule.
class HorizonError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

}  // namespace occ
