#pragma once

#include <stdexcept>
#include <string>

namespace polyfix {

// Error carrying a stable machine-readable code alongside the message.
// Codes are part of the CLI/report contract (they show up in run reports
// and drive exit codes), so they never change once published.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

inline Error dimension_mismatch(const std::string& detail) {
  return Error("DIMENSION-MISMATCH", detail);
}
inline Error out_of_range(const std::string& detail) {
  return Error("OUT-OF-RANGE", detail);
}
inline Error config_error(const std::string& detail) {
  return Error("CONFIG-ERROR", detail);
}
inline Error singular_normalization(const std::string& detail) {
  return Error("SINGULAR-NORMALIZATION", detail);
}
inline Error structure_mismatch(const std::string& detail) {
  return Error("STRUCTURE-MISMATCH", detail);
}
inline Error linearity_violation(const std::string& detail) {
  return Error("LINEARITY-VIOLATION", detail);
}
inline Error containment_violation(const std::string& detail) {
  return Error("CONTAINMENT-VIOLATION", detail);
}
inline Error no_differentiable_point(const std::string& detail) {
  return Error("NO-DIFFERENTIABLE-POINT-FOUND", detail);
}
inline Error no_orbit_found(const std::string& detail) {
  return Error("NO-ORBIT-FOUND", detail);
}
inline Error precondition_unmet(const std::string& detail) {
  return Error("PRECONDITION-UNMET", detail);
}
inline Error ambiguous_period(const std::string& detail) {
  return Error("AMBIGUOUS-PERIOD", detail);
}

}  // namespace polyfix
