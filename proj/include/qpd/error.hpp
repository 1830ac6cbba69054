#pragma once

#include <stdexcept>
#include <string>

namespace qpd {

enum class ErrorCode {
  invalid_argument,
  domain,
  degenerate_normalization,
  divergent_at_zero,
  not_converged,
  saddle_collision,
  complex_saddle,
  no_symmetry,
  fit_failure,
  config,
  io,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool ok, ErrorCode code, const std::string& what) {
  if (!ok) throw Error(code, what);
}

}  // namespace qpd
