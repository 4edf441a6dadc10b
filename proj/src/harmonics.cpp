#include "spinlet/harmonics.hpp"

#include <algorithm>
#include <numbers>

namespace spinlet {

namespace {

constexpr double kBig = 0x1p500;
constexpr double kTiny = 0x1p-500;
constexpr double kUp = 0x1p500;
constexpr double kDown = 0x1p-500;

// value = mant * 2^iexp; keeps deeply underflowing seeds alive until the
// recursion grows them back into double range.
struct Scaled {
  double mant = 0.0;
  int iexp = 0;
};

inline int parity_sign(int k) { return (k & 1) ? -1 : 1; }

// Running-sum table of ln(k!) for k = 0..n.
std::vector<double> log_factorials(int n) {
  std::vector<double> lf(static_cast<std::size_t>(n) + 1, 0.0);
  for (int k = 2; k <= n; ++k) lf[k] = lf[k - 1] + std::log(static_cast<double>(k));
  return lf;
}

// Closed-form seed d^{QM,j}_{ab}(theta) at j = max(|a|,|b|) in the
// quantum-mechanics convention, from the top-row formula
//   d^j_{jb} = (-1)^{j-b} sqrt(binom(2j, j-b)) cos^{j+b}(t/2) sin^{j-b}(t/2)
// after mapping (a,b) into the top row by the d-matrix symmetries.  The
// library convention is the transpose, so callers pass (a,b) = (n,m).
Scaled qm_seed(int a, int b, const double* lf, double log_coshalf, double log_sinhalf,
               bool cos_zero, bool sin_zero) {
  int sign = 1;
  if (std::abs(b) > std::abs(a)) {
    std::swap(a, b);
    sign *= parity_sign(a - b);
  }
  if (a < 0) {
    a = -a;
    b = -b;
    sign *= parity_sign(a - b);
  }
  const int j = a;
  sign *= parity_sign(j - b);
  if ((j + b > 0 && cos_zero) || (j - b > 0 && sin_zero)) return Scaled{0.0, 0};
  double ln = 0.5 * (lf[2 * j] - lf[j - b] - lf[j + b]);
  if (j + b > 0) ln += (j + b) * log_coshalf;
  if (j - b > 0) ln += (j - b) * log_sinhalf;
  const double e2 = ln * std::numbers::log2e;
  const int iexp = static_cast<int>(std::floor(e2));
  return Scaled{sign * std::exp2(e2 - iexp), iexp};
}

inline void half_angle(double theta, double& ch, double& sh, double& lch, double& lsh,
                       bool& chz, bool& shz) {
  ch = std::cos(0.5 * theta);
  sh = std::sin(0.5 * theta);
  chz = (ch <= 0.0);
  shz = (sh <= 0.0);
  lch = chz ? 0.0 : std::log(ch);
  lsh = shz ? 0.0 : std::log(sh);
}

} // namespace

double wigner_d(int l, int m, int n, double theta) {
  require(l >= 0 && std::abs(m) <= l && std::abs(n) <= l, errc::invalid_index,
          "wigner_d requires l >= max(|m|,|n|), got l=" + std::to_string(l) + " m=" + std::to_string(m) +
              " n=" + std::to_string(n));
  require(theta >= 0.0 && theta <= std::numbers::pi, errc::chart_domain,
          "wigner_d requires theta in [0, pi]");
  const int l0 = std::max(std::abs(m), std::abs(n));
  const auto lf = log_factorials(2 * l0);
  double ch, sh, lch, lsh;
  bool chz, shz;
  half_angle(theta, ch, sh, lch, lsh, chz, shz);
  Scaled v = qm_seed(n, m, lf.data(), lch, lsh, chz, shz);
  if (l == l0) return std::ldexp(v.mant, v.iexp);

  const double x = std::cos(theta);
  double vm1 = 0.0, v0 = v.mant;
  int iexp = v.iexp;
  for (int k = l0; k < l; ++k) {
    double v1;
    if (k == 0) {
      v1 = x * v0; // d^1_{00} = cos(theta) d^0_{00}
    } else {
      const double kk = k;
      const double den = kk * std::sqrt((((kk + 1) * (kk + 1)) - m * m) * (((kk + 1) * (kk + 1)) - n * n));
      const double c1 = (2 * kk + 1) * (kk * (kk + 1) * x - static_cast<double>(m) * n) / den;
      const double c2 = (kk + 1) * std::sqrt((kk * kk - m * m) * (kk * kk - n * n)) / den;
      v1 = c1 * v0 - c2 * vm1;
    }
    vm1 = v0;
    v0 = v1;
    const double a0 = std::abs(v0), a1 = std::abs(vm1);
    if (a0 > kBig || a1 > kBig) {
      v0 *= kDown;
      vm1 *= kDown;
      iexp += 500;
    } else if (a0 < kTiny && a1 < kTiny && (a0 > 0.0 || a1 > 0.0)) {
      v0 *= kUp;
      vm1 *= kUp;
      iexp -= 500;
    }
  }
  return std::ldexp(v0, iexp);
}

std::complex<double> eval_sph(int l, int m, int s, double theta, double phi) {
  validate(HarmonicIndex{l, m, s});
  require(theta > 0.0 && theta < std::numbers::pi, errc::chart_domain,
          "eval_sph requires 0 < theta < pi (poles excluded)");
  const double d = wigner_d(l, m, -s, theta);
  const int pref = (m > 0 && (m & 1)) ? -1 : 1; // (-1)^{max(m,0)}
  const double r = pref * std::sqrt((2.0 * l + 1.0) / (4.0 * std::numbers::pi)) * d;
  const double mp = static_cast<double>(m) * phi;
  return std::complex<double>(r * std::cos(mp), r * std::sin(mp));
}

WignerColumns::WignerColumns(int n, int lmax) : n_(n), lmax_(lmax) {
  require(lmax >= std::abs(n), errc::invalid_index,
          "WignerColumns requires lmax >= |n|, got lmax=" + std::to_string(lmax) + " n=" + std::to_string(n));
  // Offsets for the packed (A,B,C) step coefficients of each m.
  moff_.resize(static_cast<std::size_t>(2 * lmax + 2), 0);
  std::size_t total = 0;
  for (int m = -lmax; m <= lmax; ++m) {
    moff_[m + lmax] = total;
    total += 3 * static_cast<std::size_t>(lmax - lmin(m));
  }
  moff_[2 * lmax + 1] = total;
  rec_.resize(total);
  for (int m = -lmax; m <= lmax; ++m) {
    double* R = rec_.data() + moff_[m + lmax];
    for (int l = lmin(m); l < lmax; ++l, R += 3) {
      if (l == 0) {
        R[0] = 1.0; // d^1_{00} = cos(theta) d^0_{00}
        R[1] = 0.0;
        R[2] = 0.0;
        continue;
      }
      const double ll = l;
      const double den =
          ll * std::sqrt((((ll + 1) * (ll + 1)) - m * m) * (((ll + 1) * (ll + 1)) - n * n));
      R[0] = (2 * ll + 1) * ll * (ll + 1) / den;
      R[1] = -(2 * ll + 1) * static_cast<double>(m) * n / den;
      R[2] = (ll + 1) * std::sqrt((ll * ll - m * m) * (ll * ll - n * n)) / den;
    }
  }
  lf_ = log_factorials(2 * lmax);
}

void WignerColumns::column(int m, double theta, double* out) const {
  require(std::abs(m) <= lmax_, errc::invalid_index, "WignerColumns::column m out of range");
  const int l0 = lmin(m);
  double ch, sh, lch, lsh;
  bool chz, shz;
  half_angle(theta, ch, sh, lch, lsh, chz, shz);
  const Scaled seed = qm_seed(n_, m, lf_.data(), lch, lsh, chz, shz);
  double vm1 = 0.0, v0 = seed.mant;
  int iexp = seed.iexp;
  out[0] = std::ldexp(v0, iexp);
  const double x = std::cos(theta);
  const double* R = rec_.data() + moff_[m + lmax_];
  for (int l = l0; l < lmax_; ++l, R += 3) {
    const double v1 = (R[0] * x + R[1]) * v0 - R[2] * vm1;
    vm1 = v0;
    v0 = v1;
    const double a0 = std::abs(v0), a1 = std::abs(vm1);
    if (a0 > kBig || a1 > kBig) {
      v0 *= kDown;
      vm1 *= kDown;
      iexp += 500;
    } else if (a0 < kTiny && a1 < kTiny && (a0 > 0.0 || a1 > 0.0)) {
      v0 *= kUp;
      vm1 *= kUp;
      iexp -= 500;
    }
    out[l + 1 - l0] = std::ldexp(v0, iexp);
  }
}

double AlmSet::energy() const {
  double e = 0.0;
  for (const auto& z : c_) e += std::norm(z);
  return e;
}

AlmSet spin_shift(const AlmSet& alm, shift_dir dir) {
  const int s = alm.spin();
  const int s2 = s + (dir == shift_dir::raise ? 1 : -1);
  AlmSet out(s2, alm.lmax());
  for (int l = out.lmin(); l <= alm.lmax(); ++l) {
    if (l < alm.lmin()) continue; // no source row; ladder factor is 0 there anyway
    const double f = (dir == shift_dir::raise)
                         ? std::sqrt(static_cast<double>(l - s) * (l + s + 1))
                         : -std::sqrt(static_cast<double>(l + s) * (l - s + 1));
    for (int m = -l; m <= l; ++m) out.at(l, m) = f * alm.at(l, m);
  }
  return out;
}

AlmSet laplacian_apply(const AlmSet& alm) {
  AlmSet out(alm.spin(), alm.lmax());
  for (int l = alm.lmin(); l <= alm.lmax(); ++l) {
    const double e = static_cast<double>(eigenvalue_int(l, alm.spin()));
    for (int m = -l; m <= l; ++m) out.at(l, m) = e * alm.at(l, m);
  }
  return out;
}

} // namespace spinlet
