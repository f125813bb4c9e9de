#pragma once

#include <stdexcept>
#include <string>

namespace avgtrack {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class SingularMatrix : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

class NoConvergence : public Error {
 public:
  using Error::Error;
};

/// The block matrix [[A - I, B], [C, 0]] could not be inverted.
class AssumptionTwoViolated : public Error {
 public:
  using Error::Error;
};

/// A feedback gain does not make A - BK Schur stable.
class UnstableGain : public Error {
 public:
  using Error::Error;
};

class SolverFailure : public Error {
 public:
  using Error::Error;
};

/// A simulated state overflowed or became NaN.
class NonFinite : public Error {
 public:
  using Error::Error;
};

}  // namespace avgtrack
