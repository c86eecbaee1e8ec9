#pragma once

#include <stdexcept>
#include <string>

namespace repsim {

// Base class for every error thrown by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid argument or violated precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Two inputs that must share a datapoint count do not.
class ColumnMismatch : public Error {
 public:
  using Error::Error;
};

// Two inputs that must have identical shape do not.
class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

// A matrix required to be symmetric is not, beyond tolerance.
class NotSymmetric : public Error {
 public:
  using Error::Error;
};

// Every eigenvalue of a PSD matrix fell below the truncation threshold.
class AllEigenvaluesNegligible : public Error {
 public:
  using Error::Error;
};

// An iterative decomposition failed to converge.
class ConvergenceFailure : public Error {
 public:
  using Error::Error;
};

// Input carries no usable structure (e.g. all rows constant, zero matrix).
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

// Cosine distance against a zero-norm matrix.
class ZeroNorm : public Error {
 public:
  using Error::Error;
};

// Not enough canonical directions for the requested split.
class InsufficientRank : public Error {
 public:
  using Error::Error;
};

// Requested more rows than the input has.
class CountTooLarge : public Error {
 public:
  using Error::Error;
};

// Pearson correlation of a constant sequence.
class ZeroVariance : public Error {
 public:
  using Error::Error;
};

// A hidden state exceeded the overflow guard during simulation.
class NumericalOverflow : public Error {
 public:
  using Error::Error;
};

// Training loss became non-finite.
class DivergenceDetected : public Error {
 public:
  using Error::Error;
};

// File format recognized but outside the supported subset.
class UnsupportedFormat : public Error {
 public:
  using Error::Error;
};

// File header could not be parsed at all.
class MalformedHeader : public Error {
 public:
  using Error::Error;
};

// Loaded data contains NaN or Inf.
class NonFiniteValue : public Error {
 public:
  using Error::Error;
};

// Filesystem read/write failure.
class IoFailure : public Error {
 public:
  using Error::Error;
};

// Bad command line or experiment spec (CLI exit code 2).
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace repsim
