#ifndef SPINLET_SHT_HPP
#define SPINLET_SHT_HPP

#include <complex>
#include <memory>
#include <vector>

#include "spinlet/harmonics.hpp"

namespace spinlet {

// Iso-latitude quadrature grid: Gauss-Legendre nodes in cos(theta) crossed
// with equispaced azimuths.  make_grid(L) yields L+1 rings and 2L+1 azimuths;
// the rule integrates spherical polynomials of degree <= 2L exactly, which is
// what the transforms and the needlet cubature rely on.  Point index:
// k = ring * nphi + p, ring by ascending theta.
class SphericalGrid {
public:
  SphericalGrid(int L);

  int bandlimit() const { return L_; }
  int degree_exact() const { return 2 * L_; }
  int ntheta() const { return static_cast<int>(theta_.size()); }
  int nphi() const { return nphi_; }
  std::size_t npoints() const { return theta_.size() * static_cast<std::size_t>(nphi_); }

  double theta(int ring) const { return theta_[ring]; }
  double phi(int p) const;
  // Gauss-Legendre ring weight (sums to 2 over rings).
  double ring_weight(int ring) const { return glw_[ring]; }
  // Full quadrature weight of one grid node; sums to 4pi over the grid.
  double point_weight(int ring) const;

  int ring_of(std::size_t k) const { return static_cast<int>(k / nphi_); }
  int phi_index_of(std::size_t k) const { return static_cast<int>(k % nphi_); }

private:
  int L_;
  int nphi_;
  std::vector<double> theta_;
  std::vector<double> glw_;
};

std::shared_ptr<const SphericalGrid> make_grid(int L);

// Sampled spin-s field on a grid, k = ring * nphi + p.
struct SpinMap {
  int spin = 0;
  std::shared_ptr<const SphericalGrid> grid;
  std::vector<std::complex<double>> values;

  SpinMap() = default;
  SpinMap(int s, std::shared_ptr<const SphericalGrid> g)
      : spin(s), grid(std::move(g)), values(grid->npoints(), std::complex<double>(0.0, 0.0)) {}
};

// Synthesis F = sum a_{lm,s} Y_{lm,s} on the grid.  Requires
// grid->bandlimit() >= alm.lmax().  `direct` evaluates every node by the
// plain double sum instead of the ring-split path (the oracle used in tests
// and behind the CLI --oracle flag).
SpinMap synthesize(const AlmSet& alm, std::shared_ptr<const SphericalGrid> grid, bool direct = false);

// Analysis a_{lm,s} = sum_k w_k F(x_k) conj(Y_{lm,s}(x_k)) up to lmax.
// Exact for fields bandlimited to grid->bandlimit() when lmax is within it.
AlmSet analyze(const SpinMap& map, int lmax, bool direct = false);

// Electric/magnetic split of a spin table: a_{lm,s} = e_{lm} + i m_{lm} with
// both halves involutive (x_{l,-m} = conj(x_{lm})).
struct EMModes {
  AlmSet e;
  AlmSet m;

  int spin() const { return e.spin(); }
  int lmax() const { return e.lmax(); }
};

EMModes em_decompose(const AlmSet& alm);
AlmSet em_compose(const EMModes& modes);

// Scalar potential of a spin-s table (s >= 0): g_{lm} = sqrt((l-s)!/(l+s)!)
// a_{lm,s} at spin 0; applying the raising ladder s times recovers the input.
AlmSet scalar_potential(const AlmSet& alm);

// Pointwise evaluation of the synthesized field at one chart point.
std::complex<double> eval_point(const AlmSet& alm, double theta, double phi);

} // namespace spinlet

#endif
