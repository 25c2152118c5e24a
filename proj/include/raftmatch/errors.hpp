#pragma once

#include <stdexcept>
#include <string>

namespace raftmatch {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
  using Error::Error;
};

// geometry
struct DegenerateQuad : Error {
  using Error::Error;
};
struct AlignmentFailure : Error {
  AlignmentFailure(const std::string& msg, int cx, int cy)
      : Error(msg + " (cell " + std::to_string(cx) + "," + std::to_string(cy) + ")"),
        cell_x(cx),
        cell_y(cy) {}
  int cell_x;
  int cell_y;
};
struct InsufficientCells : Error {
  using Error::Error;
};

// embedder
struct ParamShapeError : Error {
  using Error::Error;
};
struct TrainDivergence : Error {
  using Error::Error;
};

// matching
struct DimMismatch : Error {
  using Error::Error;
};
struct UnknownCandidate : Error {
  using Error::Error;
};
struct InsufficientObservations : Error {
  using Error::Error;
};

// growth
struct SequenceError : Error {
  using Error::Error;
};

}  // namespace raftmatch
