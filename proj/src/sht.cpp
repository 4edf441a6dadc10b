#include "spinlet/sht.hpp"

#include <algorithm>
#include <numbers>

#include "spinlet/quadrature.hpp"

namespace spinlet {

namespace {

constexpr double kPi = std::numbers::pi;

// (-1)^{max(m,0)} prefactor of the harmonic convention.
inline double mplus_sign(int m) { return (m > 0 && (m & 1)) ? -1.0 : 1.0; }

// Unit twiddle table e^{2 pi i q / nphi}, q = 0..nphi-1.
std::vector<std::complex<double>> twiddles(int nphi) {
  std::vector<std::complex<double>> tw(nphi);
  for (int q = 0; q < nphi; ++q) {
    const double a = 2.0 * kPi * q / nphi;
    tw[q] = std::complex<double>(std::cos(a), std::sin(a));
  }
  return tw;
}

inline int mod_phase(int m, int p, int nphi) {
  const int q = (m * p) % nphi;
  return q < 0 ? q + nphi : q;
}

} // namespace

SphericalGrid::SphericalGrid(int L) : L_(L), nphi_(2 * L + 1) {
  require(L >= 0, errc::invalid_parameter, "grid bandlimit must be >= 0");
  const GaussLegendre rule = gauss_legendre(static_cast<std::size_t>(L) + 1);
  const std::size_t n = rule.nodes.size();
  theta_.resize(n);
  glw_.resize(n);
  // Nodes are ascending in x = cos(theta); store rings by ascending theta.
  for (std::size_t i = 0; i < n; ++i) {
    theta_[i] = std::acos(rule.nodes[n - 1 - i]);
    glw_[i] = rule.weights[n - 1 - i];
  }
}

double SphericalGrid::phi(int p) const { return 2.0 * kPi * p / nphi_; }

double SphericalGrid::point_weight(int ring) const { return glw_[ring] * (2.0 * kPi / nphi_); }

std::shared_ptr<const SphericalGrid> make_grid(int L) {
  return std::make_shared<const SphericalGrid>(L);
}

SpinMap synthesize(const AlmSet& alm, std::shared_ptr<const SphericalGrid> grid, bool direct) {
  require(static_cast<bool>(grid), errc::invalid_input, "synthesize: null grid");
  require(grid->bandlimit() >= alm.lmax(), errc::bandlimit_mismatch,
          "synthesize: grid bandlimit " + std::to_string(grid->bandlimit()) + " < alm lmax " +
              std::to_string(alm.lmax()));
  SpinMap map(alm.spin(), grid);
  const int L = alm.lmax();
  const int nphi = grid->nphi();
  const int s = alm.spin();

  if (direct) {
    for (int r = 0; r < grid->ntheta(); ++r) {
      for (int p = 0; p < nphi; ++p) {
        std::complex<double> acc(0.0, 0.0);
        for (int l = alm.lmin(); l <= L; ++l)
          for (int m = -l; m <= l; ++m)
            acc += alm.at(l, m) * eval_sph(l, m, s, grid->theta(r), grid->phi(p));
        map.values[static_cast<std::size_t>(r) * nphi + p] = acc;
      }
    }
    return map;
  }

  WignerColumns cols(-s, L);
  const auto tw = twiddles(nphi);
  std::vector<double> dcol(static_cast<std::size_t>(L) + 1);
  std::vector<double> pref(static_cast<std::size_t>(L) + 1);
  for (int l = 0; l <= L; ++l) pref[l] = std::sqrt((2.0 * l + 1.0) / (4.0 * kPi));
  std::vector<std::complex<double>> gm(static_cast<std::size_t>(2 * L) + 1);

  for (int r = 0; r < grid->ntheta(); ++r) {
    const double th = grid->theta(r);
    // Wigner contraction: g_m(theta_r) = sum_l a_{lm} K_{lm,s}(theta_r).
    for (int m = -L; m <= L; ++m) {
      const int l0 = std::max({std::abs(m), std::abs(s), alm.lmin()});
      if (l0 > L) {
        gm[m + L] = 0.0;
        continue;
      }
      cols.column(m, th, dcol.data());
      const int crow = cols.lmin(m); // first l held in dcol
      std::complex<double> acc(0.0, 0.0);
      for (int l = l0; l <= L; ++l) acc += alm.at(l, m) * (pref[l] * dcol[l - crow]);
      gm[m + L] = mplus_sign(m) * acc;
    }
    // Azimuthal synthesis: F(theta_r, phi_p) = sum_m g_m e^{i m phi_p}.
    std::complex<double>* row = map.values.data() + static_cast<std::size_t>(r) * nphi;
    for (int p = 0; p < nphi; ++p) {
      std::complex<double> acc(0.0, 0.0);
      for (int m = -L; m <= L; ++m) acc += gm[m + L] * tw[mod_phase(m, p, nphi)];
      row[p] = acc;
    }
  }
  return map;
}

AlmSet analyze(const SpinMap& map, int lmax, bool direct) {
  require(static_cast<bool>(map.grid), errc::invalid_input, "analyze: null grid");
  const SphericalGrid& g = *map.grid;
  require(map.values.size() == g.npoints(), errc::invalid_input, "analyze: map size mismatch");
  require(lmax >= std::abs(map.spin), errc::invalid_index, "analyze: lmax < |spin|");
  require(g.degree_exact() >= 2 * lmax, errc::bandlimit_mismatch,
          "analyze: grid exact to degree " + std::to_string(g.degree_exact()) +
              " cannot project up to lmax " + std::to_string(lmax));
  const int s = map.spin;
  const int nphi = g.nphi();
  AlmSet alm(s, lmax);

  if (direct) {
    for (int r = 0; r < g.ntheta(); ++r) {
      const double w = g.point_weight(r);
      for (int p = 0; p < nphi; ++p) {
        const std::complex<double> fv = map.values[static_cast<std::size_t>(r) * nphi + p];
        for (int l = alm.lmin(); l <= lmax; ++l)
          for (int m = -l; m <= l; ++m)
            alm.at(l, m) += w * fv * std::conj(eval_sph(l, m, s, g.theta(r), g.phi(p)));
      }
    }
    return alm;
  }

  WignerColumns cols(-s, lmax);
  const auto tw = twiddles(nphi);
  std::vector<double> dcol(static_cast<std::size_t>(lmax) + 1);
  std::vector<double> pref(static_cast<std::size_t>(lmax) + 1);
  for (int l = 0; l <= lmax; ++l) pref[l] = std::sqrt((2.0 * l + 1.0) / (4.0 * kPi));
  std::vector<std::complex<double>> hm(static_cast<std::size_t>(2 * lmax) + 1);

  for (int r = 0; r < g.ntheta(); ++r) {
    const double th = g.theta(r);
    const std::complex<double>* row = map.values.data() + static_cast<std::size_t>(r) * nphi;
    // Ring DFT: h_m = (2pi/nphi) sum_p F e^{-i m phi_p}.
    const double wphi = 2.0 * kPi / nphi;
    for (int m = -lmax; m <= lmax; ++m) {
      std::complex<double> acc(0.0, 0.0);
      for (int p = 0; p < nphi; ++p) acc += row[p] * std::conj(tw[mod_phase(m, p, nphi)]);
      hm[m + lmax] = wphi * acc;
    }
    // Wigner projection with the Gauss-Legendre ring weight.
    const double wr = g.ring_weight(r);
    for (int m = -lmax; m <= lmax; ++m) {
      const int l0 = std::max({std::abs(m), std::abs(s)});
      if (l0 > lmax) continue;
      cols.column(m, th, dcol.data());
      const int crow = cols.lmin(m);
      const std::complex<double> f = wr * mplus_sign(m) * hm[m + lmax];
      for (int l = l0; l <= lmax; ++l) alm.at(l, m) += f * (pref[l] * dcol[l - crow]);
    }
  }
  return alm;
}

EMModes em_decompose(const AlmSet& alm) {
  EMModes out{AlmSet(alm.spin(), alm.lmax()), AlmSet(alm.spin(), alm.lmax())};
  const std::complex<double> mi(0.0, -1.0);
  for (int l = alm.lmin(); l <= alm.lmax(); ++l) {
    for (int m = -l; m <= l; ++m) {
      const std::complex<double> a = alm.at(l, m);
      const std::complex<double> ac = std::conj(alm.at(l, -m));
      out.e.at(l, m) = 0.5 * (a + ac);
      out.m.at(l, m) = mi * 0.5 * (a - ac);
    }
  }
  return out;
}

AlmSet em_compose(const EMModes& modes) {
  require(modes.e.spin() == modes.m.spin() && modes.e.lmax() == modes.m.lmax(), errc::inconsistent_modes,
          "em_compose: E and M tables disagree in spin or lmax");
  AlmSet out(modes.e.spin(), modes.e.lmax());
  const std::complex<double> i1(0.0, 1.0);
  for (int l = out.lmin(); l <= out.lmax(); ++l)
    for (int m = -l; m <= l; ++m) out.at(l, m) = modes.e.at(l, m) + i1 * modes.m.at(l, m);
  return out;
}

std::complex<double> eval_point(const AlmSet& alm, double theta, double phi) {
  require(theta > 0.0 && theta < kPi, errc::chart_domain, "eval_point: theta outside the open chart");
  const int L = alm.lmax();
  const int s = alm.spin();
  WignerColumns cols(-s, L);
  std::vector<double> dcol(static_cast<std::size_t>(L) + 1);
  std::complex<double> acc(0.0, 0.0);
  for (int m = -L; m <= L; ++m) {
    const int l0 = std::max({std::abs(m), std::abs(s), alm.lmin()});
    if (l0 > L) continue;
    cols.column(m, theta, dcol.data());
    const int crow = cols.lmin(m);
    std::complex<double> gm(0.0, 0.0);
    for (int l = l0; l <= L; ++l)
      gm += alm.at(l, m) * (std::sqrt((2.0 * l + 1.0) / (4.0 * kPi)) * dcol[l - crow]);
    const double a = m * phi;
    acc += mplus_sign(m) * gm * std::complex<double>(std::cos(a), std::sin(a));
  }
  return acc;
}

AlmSet scalar_potential(const AlmSet& alm) {
  const int s = alm.spin();
  require(s >= 0, errc::unsupported_spin, "scalar_potential requires spin >= 0");
  AlmSet out(0, alm.lmax());
  for (int l = alm.lmin(); l <= alm.lmax(); ++l) {
    // sqrt((l-s)!/(l+s)!) = 1/sqrt(prod_{k=l-s+1}^{l+s} k)
    double prod = 1.0;
    for (int k = l - s + 1; k <= l + s; ++k) prod *= static_cast<double>(k);
    const double f = 1.0 / std::sqrt(prod);
    for (int m = -l; m <= l; ++m) out.at(l, m) = f * alm.at(l, m);
  }
  return out;
}

} // namespace spinlet
