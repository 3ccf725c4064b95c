#pragma once

#include <stdexcept>
#include <string>

namespace cvtk {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed arguments: wrong dimensions, bad indices, parameters out of range.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A covariance matrix or channel that violates the uncertainty relation.
class PhysicalityError : public Error {
 public:
  using Error::Error;
};

/// Singular matrices, failed decompositions, insufficient Fock cutoff.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace cvtk
