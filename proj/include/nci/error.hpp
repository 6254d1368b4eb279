#pragma once

#include <stdexcept>
#include <string>

namespace nci {

enum class Errc {
  precondition,
  packing_infeasible,
  not_honeycomb,
  geometry_mismatch,
  spec_violation,
  convergence_failure,
  gapless,
  not_chiral,
  mode_unavailable,
  empty_window,
  domain_error,
  singular_draw,
  too_few_levels,
  unsupported_dimension,
  shift_hits_site,
  ill_conditioned,
  box_too_small,
  sector_too_large,
  parse_error,
  semantic_error,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw Error(Errc::precondition, what);
}

}  // namespace nci
