#ifndef SPINLET_IO_HPP
#define SPINLET_IO_HPP

#include <string>

#include "spinlet/needlet.hpp"
#include "spinlet/stochastic.hpp"

namespace spinlet {

// All writers are atomic: content goes to a sibling temp file that is renamed
// over the target, so readers never observe a torn file.  All numeric text is
// shortest round-trip decimal, so write -> read reproduces every double bit
// for bit.

// Power spectra as CSV with header "l,C_T,C_E,C_M,C_TE,C_TM", one row per
// degree from l = 0, ascending.  Reading validates admissibility and reports
// the first offending degree.
PowerSpectra read_spectra_csv(const std::string& path);
void write_spectra_csv(const PowerSpectra& spectra, const std::string& path);

// Coefficient tables in a little-endian binary layout: magic "NDLALM1\0",
// int32 spin, uint32 lmax, then (Re, Im) float64 pairs with l outer from
// |spin| and m inner from -l to l.
AlmSet read_alm(const std::string& path);
void write_alm(const AlmSet& alm, const std::string& path);

// Needlet coefficient archive in JSON lines: one file header object, then for
// each scale a level header object followed by one line [k, theta, phi,
// lambda, Re, Im] per center.
struct CoeffArchiveInfo {
  double B = 0.0;
  int bank_spin = 0;
  int j_min = 0;
  int j_max = 0;
};

NeedletCoeffs read_coeffs(const std::string& path, CoeffArchiveInfo* info = nullptr);
void write_coeffs(const NeedletCoeffs& coeffs, const NeedletBank& bank, const std::string& path);

// Temp-plus-rename write used by every writer above.
void atomic_write(const std::string& path, const std::string& content);

// FNV-1a 64-bit digest of a file's bytes, as fixed-width hex (the input
// fingerprint quoted in CLI summaries).
std::string file_digest(const std::string& path);

} // namespace spinlet

#endif
