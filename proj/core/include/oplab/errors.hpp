#pragma once

#include <stdexcept>
#include <string>

namespace oplab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed arguments: dimension mismatches, out-of-range parameters.
class InputError : public Error {
 public:
  using Error::Error;
};

// A subspace that was required to sit inside another one does not.
class ContainmentError : public Error {
 public:
  ContainmentError(const std::string& what, double max_residual)
      : Error(what), max_residual_(max_residual) {}
  double max_residual() const noexcept { return max_residual_; }

 private:
  double max_residual_;
};

// A model violates its structural hypothesis (e.g. Q is not co-invariant).
class ModelError : public Error {
 public:
  using Error::Error;
};

// Two independent constructions of the same object disagree.
class InternalConsistencyError : public Error {
 public:
  InternalConsistencyError(const std::string& what, int index, double residual)
      : Error(what), index_(index), residual_(residual) {}
  int index() const noexcept { return index_; }
  double residual() const noexcept { return residual_; }

 private:
  int index_;
  double residual_;
};

class EigenError : public Error {
 public:
  using Error::Error;
};

// Unresolvable scenario / factor specification.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace oplab
