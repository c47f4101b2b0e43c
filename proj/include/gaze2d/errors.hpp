#pragma once

#include <stdexcept>
#include <string>

namespace gaze2d {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A vector with (near-)zero length was asked for a direction.
struct DegenerateVector : Error {
  using Error::Error;
};

// |g.n| fell below the parallel threshold; the ray never meets the plane.
struct RayParallelToScreen : Error {
  using Error::Error;
};

// Anchor cross-covariance has rank < 2; rotation is underdetermined.
struct DegenerateAnchors : Error {
  using Error::Error;
};

// Every sample in a batch failed to project.
struct AllSamplesInvalid : Error {
  using Error::Error;
};

// Training produced a non-finite loss; message carries a state snapshot.
struct NonFiniteLoss : Error {
  using Error::Error;
};

struct InvalidSpec : Error {
  using Error::Error;
};

struct InsufficientData : Error {
  using Error::Error;
};

// Malformed input file (CSV/JSON); message carries a line or field hint.
struct SchemaError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace gaze2d
