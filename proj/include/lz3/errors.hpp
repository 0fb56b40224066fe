#pragma once

#include <stdexcept>
#include <string>

namespace lz3 {

// Failure categories used across the library. Validation-type codes map to
// CLI exit code 2, numerical-failure codes to exit code 3.
enum class errc {
  non_positive_delta,
  non_positive_beta,
  negative_coupling,
  empty_window,
  degenerate_eigenvalue,
  symmetry_not_applicable,
  symmetry_required,
  crossings_outside_window,
  window_too_short,
  after_crossings_required,
  t0_too_small,
  quadrature_failure,
  step_size_underflow,
  invalid_argument,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::non_positive_delta: return "NonPositiveDelta";
    case errc::non_positive_beta: return "NonPositiveBeta";
    case errc::negative_coupling: return "NegativeCoupling";
    case errc::empty_window: return "EmptyWindow";
    case errc::degenerate_eigenvalue: return "DegenerateEigenvalue";
    case errc::symmetry_not_applicable: return "SymmetryNotApplicable";
    case errc::symmetry_required: return "SymmetryRequired";
    case errc::crossings_outside_window: return "CrossingsOutsideWindow";
    case errc::window_too_short: return "WindowTooShort";
    case errc::after_crossings_required: return "AfterCrossingsRequired";
    case errc::t0_too_small: return "T0TooSmall";
    case errc::quadrature_failure: return "QuadratureFailure";
    case errc::step_size_underflow: return "StepSizeUnderflow";
    case errc::invalid_argument: return "InvalidArgument";
  }
  return "Unknown";
}

// True for codes that indicate a numerical breakdown at runtime rather than
// a bad argument; the CLI uses this split for its exit-code contract.
inline bool is_numerical_failure(errc c) {
  return c == errc::quadrature_failure || c == errc::step_size_underflow;
}

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what),
        code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

}  // namespace lz3
