#ifndef SPINLET_HARMONICS_HPP
#define SPINLET_HARMONICS_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "spinlet/errors.hpp"

namespace spinlet {

// ---------------------------------------------------------------------------
// Conventions
//
// Spin-weighted spherical harmonics are defined through Wigner rotation
// matrix elements:
//
//   Y_{lm,s}(theta, phi) = (-1)^{max(m,0)} sqrt((2l+1)/4pi)
//                          * d^l_{m,-s}(theta) * exp(i m phi)
//
// where d^l_{mn} is the *transpose* of the quantum-mechanics (Condon-Shortley
// / Varshalovich) small-d matrix, i.e. the matrix of exp(+i theta J_y).  With
// this pairing the raising/lowering ladder
//
//   eth  Y_{lm,s} =  sqrt((l-s)(l+s+1)) Y_{lm,s+1}
//   ethb Y_{lm,s} = -sqrt((l+s)(l-s+1)) Y_{lm,s-1}
//
// holds with the signs used throughout, the m-sum of |Y_{lm,s}|^2 equals
// (2l+1)/4pi, and conj(Y_{lm,s}) = (-1)^s Y_{l,-m,-s}; in particular the
// scalar (s=0) harmonics satisfy conj(Y_{lm}) = Y_{l,-m}, so real fields have
// involutive coefficient tables a_{l,-m} = conj(a_{lm}).
// ---------------------------------------------------------------------------

struct HarmonicIndex {
  int l = 0;
  int m = 0;
  int s = 0;
  bool valid() const { return l >= 0 && std::abs(m) <= l && std::abs(s) <= l; }
};

inline void validate(const HarmonicIndex& idx) {
  require(idx.valid(), errc::invalid_index, "harmonic index requires l >= max(|m|, |s|), got l=" +
                                                std::to_string(idx.l) + " m=" + std::to_string(idx.m) +
                                                " s=" + std::to_string(idx.s));
}

// Spin Laplacian eigenvalue e_{ls} = (l - |s|)(l + |s| + 1), exact in integers.
struct Eigenvalue {
  int l = 0;
  int s = 0;
  double value = 0.0;
};

inline std::int64_t eigenvalue_int(int l, int s) {
  const std::int64_t ll = l, ss = std::abs(s);
  require(l >= 0 && ss <= ll, errc::invalid_index,
          "eigenvalue requires 0 <= |s| <= l, got l=" + std::to_string(l) + " s=" + std::to_string(s));
  return (ll - ss) * (ll + ss + 1);
}

inline Eigenvalue eigenvalue(int l, int s) {
  return Eigenvalue{l, s, static_cast<double>(eigenvalue_int(l, s))};
}

// Wigner small-d matrix element d^l_{mn}(theta) in the library convention
// (see the header comment).  theta in [0, pi].  Stable for l up to at least
// 256 (log-space seed plus renormalized three-term recursion in l).
double wigner_d(int l, int m, int n, double theta);

// Single spin-weighted harmonic value.  Requires 0 < theta < pi (the open
// chart; the poles are excluded).
std::complex<double> eval_sph(int l, int m, int s, double theta, double phi);

// Precomputed l-recursion coefficients at fixed column index n, for all
// (m, l <= lmax).  column() fills d^l_{mn}(theta) for l = lmin(m)..lmax.
// This is the workhorse behind the ring transforms: one column per (ring, m)
// costs O(lmax) flops with no square roots in the inner loop.
class WignerColumns {
public:
  WignerColumns(int n, int lmax);

  int n() const { return n_; }
  int lmax() const { return lmax_; }
  int lmin(int m) const { return std::max(std::abs(m), std::abs(n_)); }

  // out[l - lmin(m)] = d^l_{mn}(theta) for l = lmin(m)..lmax.
  void column(int m, double theta, double* out) const;

private:
  int n_;
  int lmax_;
  std::vector<double> rec_;         // packed (A, B, C) triples per (m, l)
  std::vector<std::size_t> moff_;   // offset of m's triples, m = -lmax..lmax
  std::vector<double> lf_;          // ln(k!) table for the seeds
};

// Spin-s coefficient table a_{lm,s} for l = |s|..lmax, m = -l..l, stored
// contiguously (l outer, m inner).  Degrees below |s| do not exist.
class AlmSet {
public:
  AlmSet() = default;
  AlmSet(int spin, int lmax)
      : spin_(spin), lmax_(lmax), lmin_(std::abs(spin)),
        c_(check_size(spin, lmax), std::complex<double>(0.0, 0.0)) {}

  int spin() const { return spin_; }
  int lmax() const { return lmax_; }
  int lmin() const { return lmin_; }
  std::size_t size() const { return c_.size(); }

  std::complex<double>& at(int l, int m) { return c_[index(l, m)]; }
  const std::complex<double>& at(int l, int m) const { return c_[index(l, m)]; }

  std::complex<double>* data() { return c_.data(); }
  const std::complex<double>* data() const { return c_.data(); }

  std::size_t index(int l, int m) const {
    require(l >= lmin_ && l <= lmax_ && std::abs(m) <= l, errc::invalid_index,
            "alm index (l=" + std::to_string(l) + ", m=" + std::to_string(m) + ") out of range for spin " +
                std::to_string(spin_) + ", lmax " + std::to_string(lmax_));
    return static_cast<std::size_t>(l) * l - static_cast<std::size_t>(lmin_) * lmin_ +
           static_cast<std::size_t>(l + m);
  }

  // Sum of |a_{lm}|^2 over the table (coefficient-space L2 energy).
  double energy() const;

private:
  static std::size_t check_size(int spin, int lmax) {
    require(lmax >= std::abs(spin), errc::invalid_index,
            "AlmSet requires lmax >= |spin|, got lmax=" + std::to_string(lmax) + " spin=" + std::to_string(spin));
    const std::size_t n1 = static_cast<std::size_t>(lmax) + 1;
    return n1 * n1 - static_cast<std::size_t>(std::abs(spin)) * std::abs(spin);
  }

  int spin_ = 0;
  int lmax_ = 0;
  int lmin_ = 0;
  std::vector<std::complex<double>> c_;
};

enum class shift_dir { raise, lower };

// Coefficient-space ladder operator: raise maps spin s to s+1 scaling each
// degree by sqrt((l-s)(l+s+1)); lower maps to s-1 scaling by
// -sqrt((l+s)(l-s+1)).  Rows that leave the valid range l >= |s'| vanish with
// exactly zero ladder factor, so nothing is silently truncated.
AlmSet spin_shift(const AlmSet& alm, shift_dir dir);

// Spin Laplacian in coefficient space: multiplies each degree-l row by
// e_{ls} = (l-|s|)(l+|s|+1).  (lower o raise == -laplacian_apply for s >= 0.)
AlmSet laplacian_apply(const AlmSet& alm);

} // namespace spinlet

#endif
