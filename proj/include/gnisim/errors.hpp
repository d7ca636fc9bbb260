#pragma once

#include <stdexcept>
#include <string>

namespace gnisim {

enum class errc {
  dimension_too_large,
  invalid_samples,
  degree_exceeded,
  negative_time,
  non_finite_input,
  zero_variance,
  precondition_violated,
  not_simplex_valued,
  non_orthonormal_basis,
  budget_exceeded,
  invalid_rho,
  invalid_input,
  dim_mismatch,
  nonmonotone,
  io_error,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::dimension_too_large: return "DIMENSION_TOO_LARGE";
    case errc::invalid_samples: return "INVALID_SAMPLES";
    case errc::degree_exceeded: return "DEGREE_EXCEEDED";
    case errc::negative_time: return "NEGATIVE_TIME";
    case errc::non_finite_input: return "NON_FINITE_INPUT";
    case errc::zero_variance: return "ZERO_VARIANCE";
    case errc::precondition_violated: return "PRECONDITION_VIOLATED";
    case errc::not_simplex_valued: return "NOT_SIMPLEX_VALUED";
    case errc::non_orthonormal_basis: return "NON_ORTHONORMAL_BASIS";
    case errc::budget_exceeded: return "BUDGET_EXCEEDED";
    case errc::invalid_rho: return "INVALID_RHO";
    case errc::invalid_input: return "INVALID_INPUT";
    case errc::dim_mismatch: return "DIM_MISMATCH";
    case errc::nonmonotone: return "NONMONOTONE";
    case errc::io_error: return "IO_ERROR";
  }
  return "UNKNOWN";
}

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  errc code() const { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw error(code, what); }

inline void require(bool cond, errc code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace gnisim
