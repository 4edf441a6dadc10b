#ifndef SPINLET_BESOV_HPP
#define SPINLET_BESOV_HPP

#include <array>
#include <vector>

#include "spinlet/needlet.hpp"

namespace spinlet {

// L^p(S^2) norm of a sampled field via the grid cubature; p = infinity takes
// the sup over the grid nodes.  Exact for p = 2 on bandlimited input; for
// other p it is the cubature approximation on the map's own grid.
double lp_norm(const SpinMap& map, double p);

// L^p norm of one needlet psi_{jk}, evaluated on a dense grid (bandlimit
// 2 L_j + 8) so that the p = 2 case is exact and the sup is well resolved.
double psi_lp(const NeedletBank& bank, needlet_kind kind, int j, std::size_t k, double p);

// Per-level coefficient aggregates (sum_k |beta_{jk}|^p)^{1/p} (sup for
// p = infinity), ordered j_min..j_max.
std::vector<double> level_profile(const NeedletCoeffs& coeffs, double p);

// Smoothness-scale parameters of the sequence norm
//   ||F||_p + [ sum_j ( B^{j (r + 2(1/2 - 1/p))} (sum_k |beta_{jk}|^p)^{1/p} )^q ]^{1/q}.
struct BesovParams {
  double p = 2.0; // coefficient exponent, in [1, infinity]
  double q = 2.0; // level exponent, finite >= 1
  double r = 1.0; // smoothness index, > 0
};

double besov_norm(const NeedletCoeffs& coeffs, const NeedletBank& bank, const BesovParams& params);

// Axisymmetric band or geodesic cap, with analytic area and distance.
struct Mask {
  enum class shape { band, cap };
  shape kind = shape::band;
  double theta1 = 0.0, theta2 = 0.0;                        // band: theta1 <= theta <= theta2
  double center_theta = 0.0, center_phi = 0.0, radius = 0.0; // cap: geodesic ball

  void validate() const;
  bool contains(double theta, double phi) const;
  double area() const;
  // Geodesic distance from a point to the mask (0 inside).
  double distance(double theta, double phi) const;
};

// Mass of |psi_{jk}| over a mask, with the scale-normalized decay ratios
//   scaled[tau-1] = mask_l1 * (1 + B^j dist)^tau / (B^j area),   tau = 1..3,
// which spatial localization keeps bounded uniformly in j once the mask sits
// at positive distance from the needlet center.
struct LeakageReport {
  double mask_l1 = 0.0;
  double mask_area = 0.0;
  double distance = 0.0;
  std::array<double, 3> scaled{};
};

LeakageReport mask_leakage(const NeedletBank& bank, needlet_kind kind, int j, std::size_t k,
                           const Mask& mask);

} // namespace spinlet

#endif
