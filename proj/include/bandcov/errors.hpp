#pragma once

#include <stdexcept>
#include <string>

namespace bandcov {

// Base for all data/estimation failures. The CLI maps these to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

class SingularDesign : public Error {
 public:
  using Error::Error;
};

class BandwidthTooLarge : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

class SpectralDegeneracy : public Error {
 public:
  using Error::Error;
};

class ZeroTrace : public Error {
 public:
  using Error::Error;
};

class SingularBlock : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace bandcov
