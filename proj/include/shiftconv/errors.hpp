#pragma once

#include <stdexcept>
#include <string>

namespace shiftconv {

class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class OutOfRange : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Numerical result could not be certified at the requested tolerance.
class AccuracyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InfeasibleRange : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateFamily : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace shiftconv
