#ifndef SPINLET_NEEDLET_HPP
#define SPINLET_NEEDLET_HPP

#include <complex>
#include <memory>
#include <utility>
#include <vector>

#include "spinlet/sht.hpp"

namespace spinlet {

// Smooth compactly supported needlet profile.  phi is a C^inf plateau equal
// to 1 on [0, 1/B] and 0 on [1, inf), built from the normalized antiderivative
// of the bump exp(-1/(1-t^2)); b2(xi) = phi(xi/B) - phi(xi) is supported on
// (1/B, B), and sum_j b2(xi / B^j) telescopes to exactly 1 for xi > 0.
// The antiderivative is tabulated once on a dense uniform table and evaluated
// by cubic Hermite interpolation with the exact derivative at the nodes;
// the evaluation error budget is eval_tol.
class NeedletFilter {
public:
  explicit NeedletFilter(double B, double eval_tol = 1e-12, int table_intervals = 4096);

  double B() const { return B_; }
  double eval_tol() const { return eval_tol_; }

  double phi(double xi) const;
  double b2(double xi) const; // clamped at 0 against interpolation dust
  double b(double xi) const;

  // sum over the (finitely many) active scales of b2(xi / B^j), xi > 0.
  double partition_sum(double xi) const;

private:
  double B_;
  double eval_tol_;
  double h_;                  // table spacing on [-1, 1]
  std::vector<double> val_;   // antiderivative values, val_[0] = 0, val_[N] = 1
  std::vector<double> der_;   // exact derivatives f(x)/integral
};

// Largest degree l >= |s| whose eigenvalue e_{ls} fits under B^{2(j+1)}; this
// bounds the support of scale j and sets the level's cubature grid.
int level_bandlimit(double B, int j, int s);

enum class needlet_kind { spin, mixed };

struct NeedletLevel {
  int j = 0;
  int bandlimit = 0; // L_j
  std::shared_ptr<const SphericalGrid> grid;
};

// All scales j_min..j_max for one (B, spin): per-level cubature grids plus the
// filter.  j_min is the first scale whose window reaches the smallest positive
// eigenvalue e_{|s|+1, s}.
class NeedletBank {
public:
  NeedletBank(NeedletFilter filter, int spin, int j_max);

  const NeedletFilter& filter() const { return filter_; }
  int spin() const { return spin_; }
  int j_min() const { return j_min_; }
  int j_max() const { return j_max_; }
  const NeedletLevel& level(int j) const;

  // b(sqrt(e_{ls}) / B^j); exactly zero outside the level support.
  double filter_value(int j, int l) const;

  // Largest degree fully covered by scales <= j_max (partition of unity sums
  // to 1 there); analysis beyond it would silently lose energy.
  int coverage_lmax() const { return coverage_lmax_; }

private:
  NeedletFilter filter_;
  int spin_;
  int j_min_;
  int j_max_;
  int coverage_lmax_;
  std::vector<NeedletLevel> levels_;
};

NeedletBank build_bank(const NeedletFilter& filter, int spin, int j_max);

// Needlet coefficients: beta[j - j_min][k], k indexing the level grid points.
// kind==mixed uses scalar harmonics at the centers, so for involutive E/M
// inputs the real and imaginary parts are the electric/magnetic coefficients.
// `spin` is the spin of the field the coefficients synthesize back to (the
// bank spin, or 0 for the scalar companion channel of the cross estimators).
struct NeedletCoeffs {
  needlet_kind kind = needlet_kind::spin;
  int spin = 0;
  int j_min = 0;
  std::vector<std::vector<std::complex<double>>> beta;

  int j_max() const { return j_min + static_cast<int>(beta.size()) - 1; }
  std::vector<std::complex<double>>& level(int j) { return beta.at(static_cast<std::size_t>(j - j_min)); }
  const std::vector<std::complex<double>>& level(int j) const {
    return beta.at(static_cast<std::size_t>(j - j_min));
  }
  // Electric / magnetic real views (kind==mixed).
  std::vector<double> beta_e(int j) const;
  std::vector<double> beta_m(int j) const;
  double energy() const; // sum over all levels of |beta|^2
};

// Coefficients of one level: beta_{jk} = sqrt(lambda_k) * (filtered field at
// the level grid nodes).  The l = |s| row carries an exactly zero filter
// factor, so the projector-excluded subspace never enters.
std::vector<std::complex<double>> needlet_analyze_level(const AlmSet& alm, const NeedletBank& bank,
                                                        needlet_kind kind, int j, bool direct = false);

// Full analysis over all bank levels.  Requires alm.spin == bank.spin and the
// bank to cover alm.lmax.
NeedletCoeffs needlet_analyze(const AlmSet& alm, const NeedletBank& bank, needlet_kind kind);

// Scalar companion channel: a spin-0 table pushed through the *spin-shifted*
// filter b(sqrt(e_{ls})/B^j) with the bank's spin, scalar harmonics at the
// centers, degrees below |s| dropped.  Tagged (mixed, spin 0).
NeedletCoeffs analyze_companion_scalar(const AlmSet& alm0, const NeedletBank& bank);
std::vector<std::complex<double>> analyze_companion_scalar_level(const AlmSet& alm0,
                                                                 const NeedletBank& bank, int j,
                                                                 bool direct = false);

// Adjoint accumulation F = sum_{jk} beta_{jk} psi_{jk}; inverts
// needlet_analyze exactly (to rounding) on fields covered by the bank with
// the l = |s| row removed.
AlmSet needlet_synthesize(const NeedletCoeffs& coeffs, const NeedletBank& bank, bool direct = false);

// Harmonic table of a single needlet psi_{jk} (unit coefficient at (j,k)).
AlmSet needlet_alm(const NeedletBank& bank, needlet_kind kind, int j, std::size_t k);

// Pointwise needlet values at arbitrary chart points (theta, phi).
std::vector<std::complex<double>> eval_needlet(const NeedletBank& bank, needlet_kind kind, int j,
                                               std::size_t k,
                                               const std::vector<std::pair<double, double>>& points);

// Diagonal block multiplier b^2(sqrt(e_{ls})/B^j) per degree.  via_scalar_shift
// computes the eigenvalue through the scalar-shift identity
// l(l+1) - |s|(|s|+1) instead of (l-|s|)(l+|s|+1); the two integer routes are
// identical, which is what makes the spin and mixed block operators one and
// the same multiplier.
double qj_multiplier(const NeedletFilter& filter, int j, int s, int l, bool via_scalar_shift = false);
AlmSet qj_apply(const AlmSet& alm, const NeedletFilter& filter, int j);

// Low-pass partial sum of the block operators up to scale N: the running sum
// of the window multipliers, equal to phi(sqrt(e_{ls})/B^{N+1}) up to
// rounding, with an exact 0 at l = |s|.  Because the sum is accumulated in
// increasing j, pn_multiplier(N) == pn_multiplier(N-1) + qj_multiplier(N)
// holds bitwise.
double pn_multiplier(const NeedletFilter& filter, int N, int s, int l);
AlmSet pn_apply(const AlmSet& alm, const NeedletFilter& filter, int N);

} // namespace spinlet

#endif
