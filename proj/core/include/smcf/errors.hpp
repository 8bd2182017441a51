#pragma once

#include <stdexcept>

namespace smcf {

// Bad constructor arguments or violated operation preconditions.
struct ConstructionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Two discrete distributions on different alphabets.
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// All-zero or non-finite selection weights.
struct DegenerateWeightError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A rejection loop hit its iteration cap.
struct NonterminationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace smcf
