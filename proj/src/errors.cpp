#include "spinlet/errors.hpp"

namespace spinlet {

const char* errc_name(errc c) {
  switch (c) {
  case errc::invalid_index: return "invalid_index";
  case errc::chart_domain: return "chart_domain";
  case errc::bandlimit_mismatch: return "bandlimit_mismatch";
  case errc::invalid_input: return "invalid_input";
  case errc::inconsistent_modes: return "inconsistent_modes";
  case errc::unsupported_spin: return "unsupported_spin";
  case errc::invalid_parameter: return "invalid_parameter";
  case errc::invalid_spectra: return "invalid_spectra";
  case errc::truncation: return "truncation";
  case errc::format_error: return "format_error";
  case errc::numeric_violation: return "numeric_violation";
  }
  return "unknown";
}

} // namespace spinlet
