#pragma once

#include <stdexcept>
#include <string>

namespace jlab {

// A lattice operation would push amplitude outside the declared window.
struct WindowOverflowError : std::runtime_error {
  explicit WindowOverflowError(const std::string& what) : std::runtime_error(what) {}
};

// A theta grid is too coarse for the requested window (Fourier modes alias).
struct AliasingError : std::runtime_error {
  explicit AliasingError(const std::string& what) : std::runtime_error(what) {}
};

// A slope or discriminant derivative vanished at a node where the punctured
// grid should have kept us away from degeneracies.
struct DegeneratePointError : std::runtime_error {
  explicit DegeneratePointError(const std::string& what) : std::runtime_error(what) {}
};

// A stated precondition of a checked inequality does not hold.
struct PreconditionError : std::invalid_argument {
  explicit PreconditionError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace jlab
