#pragma once

#include <stdexcept>
#include <string>

namespace mintops {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed input document.
struct ParseError : Error {
  using Error::Error;
};

/// Well-formed input that breaks an invariant; the message names the field.
struct ValidationError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

/// No plan exists on the risk-averse map.
struct MissionInfeasible : Error {
  using Error::Error;
};

/// An answer contradicts an already-resolved gap.
struct ContradictionError : Error {
  using Error::Error;
};

}  // namespace mintops
