#pragma once

#include <stdexcept>
#include <string>

namespace fm {

enum class ErrorKind {
  ConstraintViolation,
  Domain,
  NumericalConsistency,
  Structure,
  Pole,
  Admissibility,
  FlowSingularity,
  Accuracy,
  OnDiscontinuity,
  Pairing,
  Degeneracy,
  Unsupported,
  ThetaNull,
  Integration,
  Contour,
  Ordering,
  Fit,
  Shape,
};

const char* to_string(ErrorKind k);

// Every library failure carries a kind so callers (and the CLI) can map it.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace fm
