#pragma once

#include <stdexcept>
#include <string>

namespace plspath {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Model-spec parsing and semantic violations.
struct SpecError : Error {
  using Error::Error;
};

// Dataset loading and validation failures.
struct DataError : Error {
  using Error::Error;
};

// PLS estimation failures (non-convergence is NOT an error; singularities are).
struct EstimationError : Error {
  using Error::Error;
};

// Undefined or ill-posed metric requests (KMO on identity, share with TE=0, ...).
struct MetricError : Error {
  using Error::Error;
};

// Classification-stage failures (infeasible stratification, single-class task).
struct ClassifyError : Error {
  using Error::Error;
};

}  // namespace plspath
