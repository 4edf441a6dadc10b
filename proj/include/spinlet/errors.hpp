#ifndef SPINLET_ERRORS_HPP
#define SPINLET_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace spinlet {

// Error categories raised by the library. The CLI maps config/input problems
// to exit code 2 and numeric-contract violations to exit code 3.
enum class errc {
  invalid_index,      // harmonic index out of range (|m|>l, l<|s|, ...)
  chart_domain,       // point outside the open chart 0<theta<pi
  bandlimit_mismatch, // grid too coarse for the requested bandlimit
  invalid_input,      // malformed argument combination
  inconsistent_modes, // E/M tables disagree in spin/lmax
  unsupported_spin,   // operation undefined for this spin
  invalid_parameter,  // out-of-domain scalar parameter (B<=1, p<1, ...)
  invalid_spectra,    // admissibility violation in a power spectrum
  truncation,         // requested content exceeds what a bank/spectrum covers
  format_error,       // malformed file on read
  numeric_violation,  // a verified numeric contract failed
};

const char* errc_name(errc c);

class error : public std::runtime_error {
public:
  error(errc kind, const std::string& what)
      : std::runtime_error(std::string(errc_name(kind)) + ": " + what), kind_(kind) {}
  errc kind() const { return kind_; }

private:
  errc kind_;
};

[[noreturn]] inline void fail(errc kind, const std::string& what) { throw error(kind, what); }

inline void require(bool cond, errc kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

} // namespace spinlet

#endif
