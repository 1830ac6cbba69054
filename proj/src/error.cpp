#include "qpd/error.hpp"

namespace qpd {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::domain: return "out-of-domain";
    case ErrorCode::degenerate_normalization: return "degenerate-normalization";
    case ErrorCode::divergent_at_zero: return "divergent-at-zero";
    case ErrorCode::not_converged: return "not-converged";
    case ErrorCode::saddle_collision: return "saddle-collision";
    case ErrorCode::complex_saddle: return "complex-saddle";
    case ErrorCode::no_symmetry: return "no-parity-symmetry";
    case ErrorCode::fit_failure: return "fit-failure";
    case ErrorCode::config: return "config";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

}  // namespace qpd
