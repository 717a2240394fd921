#pragma once

#include <stdexcept>
#include <string>

namespace spps {

/// Base class for all errors raised by this library.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument or violated type invariant (bad user input).
class validation_error : public error {
 public:
  using error::error;
};

/// Dimensionally incompatible unit conversion.
class unit_error : public error {
 public:
  using error::error;
};

/// Malformed input file; carries the offending line number when known.
class parse_error : public error {
 public:
  explicit parse_error(const std::string& what, long line = -1)
      : error(line >= 0 ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

/// Requested evaluation lies outside the model's validity region.
class validity_error : public error {
 public:
  using error::error;
};

/// Grid resolution cannot support the requested computation.
class resolution_error : public error {
 public:
  using error::error;
};

/// Curve fit failed to converge or the data carry no usable decay.
class fit_error : public error {
 public:
  using error::error;
};

/// Inverse problem has no admissible solution for the given inputs.
class infeasible_error : public error {
 public:
  using error::error;
};

}  // namespace spps
