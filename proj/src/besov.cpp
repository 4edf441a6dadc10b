#include "spinlet/besov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace spinlet {

namespace {

constexpr double kPi = std::numbers::pi;

void check_p(double p) {
  require(p >= 1.0, errc::invalid_parameter, "norm exponent p must be >= 1");
}

double lp_aggregate(const std::vector<std::complex<double>>& v, double p) {
  if (std::isinf(p)) {
    double sup = 0.0;
    for (const auto& z : v) sup = std::max(sup, std::abs(z));
    return sup;
  }
  double sum = 0.0;
  for (const auto& z : v) sum += std::pow(std::abs(z), p);
  return std::pow(sum, 1.0 / p);
}

} // namespace

double lp_norm(const SpinMap& map, double p) {
  check_p(p);
  require(static_cast<bool>(map.grid), errc::invalid_input, "lp_norm: null grid");
  if (std::isinf(p)) {
    double sup = 0.0;
    for (const auto& z : map.values) sup = std::max(sup, std::abs(z));
    return sup;
  }
  const SphericalGrid& g = *map.grid;
  double sum = 0.0;
  for (std::size_t k = 0; k < map.values.size(); ++k)
    sum += g.point_weight(g.ring_of(k)) * std::pow(std::abs(map.values[k]), p);
  return std::pow(sum, 1.0 / p);
}

double psi_lp(const NeedletBank& bank, needlet_kind kind, int j, std::size_t k, double p) {
  check_p(p);
  const AlmSet psi = needlet_alm(bank, kind, j, k);
  const auto grid = make_grid(2 * bank.level(j).bandlimit + 8);
  return lp_norm(synthesize(psi, grid), p);
}

std::vector<double> level_profile(const NeedletCoeffs& coeffs, double p) {
  check_p(p);
  std::vector<double> out;
  out.reserve(coeffs.beta.size());
  for (const auto& lev : coeffs.beta) out.push_back(lp_aggregate(lev, p));
  return out;
}

double besov_norm(const NeedletCoeffs& coeffs, const NeedletBank& bank, const BesovParams& params) {
  check_p(params.p);
  require(params.q >= 1.0 && !std::isinf(params.q), errc::invalid_parameter,
          "level exponent q must be finite and >= 1");
  require(params.r > 0.0, errc::invalid_parameter, "smoothness index r must be positive");

  const AlmSet f = needlet_synthesize(coeffs, bank);
  const auto grid = make_grid(2 * f.lmax() + 8);
  const double map_term = lp_norm(synthesize(f, grid), params.p);

  const double inv_p = std::isinf(params.p) ? 0.0 : 1.0 / params.p;
  const double expo = params.r + 2.0 * (0.5 - inv_p);
  const std::vector<double> w = level_profile(coeffs, params.p);
  double sum = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const int j = coeffs.j_min + static_cast<int>(i);
    sum += std::pow(std::pow(bank.filter().B(), j * expo) * w[i], params.q);
  }
  return map_term + std::pow(sum, 1.0 / params.q);
}

void Mask::validate() const {
  if (kind == shape::band) {
    require(theta1 >= 0.0 && theta2 <= kPi && theta1 < theta2, errc::invalid_parameter,
            "band mask requires 0 <= theta1 < theta2 <= pi");
  } else {
    require(center_theta > 0.0 && center_theta < kPi, errc::chart_domain,
            "cap center must lie in the open chart");
    require(radius > 0.0 && radius < kPi, errc::invalid_parameter,
            "cap radius must lie in (0, pi)");
  }
}

namespace {

double geodesic(double theta1, double phi1, double theta2, double phi2) {
  const double c = std::cos(theta1) * std::cos(theta2) +
                   std::sin(theta1) * std::sin(theta2) * std::cos(phi1 - phi2);
  return std::acos(std::clamp(c, -1.0, 1.0));
}

} // namespace

bool Mask::contains(double theta, double phi) const {
  if (kind == shape::band) return theta >= theta1 && theta <= theta2;
  return geodesic(center_theta, center_phi, theta, phi) <= radius;
}

double Mask::area() const {
  if (kind == shape::band) return 2.0 * kPi * (std::cos(theta1) - std::cos(theta2));
  return 2.0 * kPi * (1.0 - std::cos(radius));
}

double Mask::distance(double theta, double phi) const {
  if (kind == shape::band) {
    if (theta < theta1) return theta1 - theta;
    if (theta > theta2) return theta - theta2;
    return 0.0;
  }
  return std::max(0.0, geodesic(center_theta, center_phi, theta, phi) - radius);
}

LeakageReport mask_leakage(const NeedletBank& bank, needlet_kind kind, int j, std::size_t k,
                           const Mask& mask) {
  mask.validate();
  const NeedletLevel& lev = bank.level(j);
  require(k < lev.grid->npoints(), errc::invalid_index, "needlet center index out of range");

  const AlmSet psi = needlet_alm(bank, kind, j, k);
  const auto grid = make_grid(2 * lev.bandlimit + 8);
  const SpinMap map = synthesize(psi, grid);

  LeakageReport rep;
  rep.mask_area = mask.area();
  rep.distance = mask.distance(lev.grid->theta(lev.grid->ring_of(k)), lev.grid->phi(lev.grid->phi_index_of(k)));
  for (std::size_t i = 0; i < map.values.size(); ++i) {
    const int r = grid->ring_of(i);
    if (!mask.contains(grid->theta(r), grid->phi(grid->phi_index_of(i)))) continue;
    rep.mask_l1 += grid->point_weight(r) * std::abs(map.values[i]);
  }
  const double bj = std::pow(bank.filter().B(), j);
  for (int tau = 1; tau <= 3; ++tau)
    rep.scaled[static_cast<std::size_t>(tau - 1)] =
        rep.mask_l1 * std::pow(1.0 + bj * rep.distance, tau) / (bj * rep.mask_area);
  return rep;
}

} // namespace spinlet
