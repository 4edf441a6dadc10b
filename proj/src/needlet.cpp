#include "spinlet/needlet.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "spinlet/quadrature.hpp"

namespace spinlet {

namespace {

constexpr double kPi = std::numbers::pi;

inline double mplus_sign(int m) { return (m > 0 && (m & 1)) ? -1.0 : 1.0; }

// Largest l >= |s| with e_{ls} <= bound (always at least |s|, whose
// eigenvalue is 0).
int max_degree_with_eigenvalue_at_most(double bound, int s) {
  int l = std::abs(s);
  while (static_cast<double>(eigenvalue_int(l + 1, s)) <= bound) {
    ++l;
    require(l < (1 << 20), errc::invalid_parameter, "needlet scale too fine for this build");
  }
  return l;
}

} // namespace

NeedletFilter::NeedletFilter(double B, double eval_tol, int table_intervals)
    : B_(B), eval_tol_(eval_tol) {
  require(B > 1.0, errc::invalid_parameter, "needlet parameter B must exceed 1");
  require(eval_tol > 0.0, errc::invalid_parameter, "filter eval_tol must be positive");
  require(table_intervals >= 16, errc::invalid_parameter, "filter table too coarse");

  const int n = table_intervals;
  h_ = 2.0 / n;
  val_.assign(static_cast<std::size_t>(n) + 1, 0.0);
  der_.assign(static_cast<std::size_t>(n) + 1, 0.0);

  const auto bump = [](double t) {
    const double u = 1.0 - t * t;
    return u > 0.0 ? std::exp(-1.0 / u) : 0.0;
  };

  // Cumulative panel integrals of the bump; 16-point Gauss-Legendre per panel
  // leaves the quadrature error far below the interpolation budget.
  const GaussLegendre rule = gauss_legendre(16);
  long double acc = 0.0L;
  for (int i = 0; i < n; ++i) {
    const double a = -1.0 + i * h_;
    long double panel = 0.0L;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q)
      panel += static_cast<long double>(rule.weights[q]) * bump(a + 0.5 * h_ * (rule.nodes[q] + 1.0));
    acc += panel * static_cast<long double>(0.5 * h_);
    val_[static_cast<std::size_t>(i) + 1] = static_cast<double>(acc);
  }
  const double total = val_[static_cast<std::size_t>(n)];
  for (int i = 0; i <= n; ++i) {
    val_[static_cast<std::size_t>(i)] /= total;
    der_[static_cast<std::size_t>(i)] = bump(-1.0 + i * h_) / total;
  }
  val_[0] = 0.0;
  val_[static_cast<std::size_t>(n)] = 1.0;
}

double NeedletFilter::phi(double xi) const {
  require(xi >= 0.0, errc::invalid_parameter, "filter argument must be nonnegative");
  if (xi <= 1.0 / B_) return 1.0;
  if (xi >= 1.0) return 0.0;
  // Map the transition band (1/B, 1) onto the bump chart (-1, 1), decreasing.
  const double x = 1.0 - 2.0 * (B_ * xi - 1.0) / (B_ - 1.0);
  if (x >= 1.0) return 1.0;
  if (x <= -1.0) return 0.0;
  const int n = static_cast<int>(val_.size()) - 1;
  const double u = (x + 1.0) / h_;
  const int i = std::min(static_cast<int>(u), n - 1);
  const double t = u - i;
  const double t2 = t * t, t3 = t2 * t;
  const double v = (2.0 * t3 - 3.0 * t2 + 1.0) * val_[i] + (t3 - 2.0 * t2 + t) * (h_ * der_[i]) +
                   (-2.0 * t3 + 3.0 * t2) * val_[i + 1] + (t3 - t2) * (h_ * der_[i + 1]);
  return std::clamp(v, 0.0, 1.0);
}

double NeedletFilter::b2(double xi) const {
  const double v = phi(xi / B_) - phi(xi);
  return v > 0.0 ? v : 0.0;
}

double NeedletFilter::b(double xi) const { return std::sqrt(b2(xi)); }

double NeedletFilter::partition_sum(double xi) const {
  require(xi > 0.0, errc::invalid_parameter, "partition argument must be positive");
  // b2(xi / B^j) vanishes unless log_B(xi) - 1 < j < log_B(xi) + 1; pad the
  // window by one scale on each side against rounding of the logarithm.
  const int jc = static_cast<int>(std::floor(std::log(xi) / std::log(B_)));
  double sum = 0.0;
  for (int j = jc - 2; j <= jc + 2; ++j) sum += b2(xi / std::pow(B_, j));
  return sum;
}

int level_bandlimit(double B, int j, int s) {
  require(B > 1.0, errc::invalid_parameter, "needlet parameter B must exceed 1");
  require(j >= 0, errc::invalid_parameter, "needlet scale must be >= 0");
  return max_degree_with_eigenvalue_at_most(std::pow(B, 2.0 * (j + 1)), s);
}

NeedletBank::NeedletBank(NeedletFilter filter, int spin, int j_max)
    : filter_(std::move(filter)), spin_(spin), j_max_(j_max) {
  const double B = filter_.B();
  const int as = std::abs(spin);
  // First scale whose window reaches the smallest positive eigenvalue.
  const double e1 = static_cast<double>(eigenvalue_int(as + 1, spin));
  int j = 0;
  while (std::pow(B, 2.0 * (j + 1)) <= e1) {
    ++j;
    require(j < 64, errc::invalid_parameter, "no admissible first scale for this B");
  }
  j_min_ = j;
  require(j_max >= j_min_, errc::invalid_parameter,
          "j_max " + std::to_string(j_max) + " is below the first admissible scale " +
              std::to_string(j_min_));
  levels_.reserve(static_cast<std::size_t>(j_max_ - j_min_) + 1);
  for (int jj = j_min_; jj <= j_max_; ++jj) {
    NeedletLevel lev;
    lev.j = jj;
    lev.bandlimit = level_bandlimit(B, jj, spin_);
    lev.grid = make_grid(lev.bandlimit);
    levels_.push_back(std::move(lev));
  }
  coverage_lmax_ = max_degree_with_eigenvalue_at_most(std::pow(B, 2.0 * j_max_), spin_);
}

const NeedletLevel& NeedletBank::level(int j) const {
  require(j >= j_min_ && j <= j_max_, errc::invalid_index,
          "scale " + std::to_string(j) + " outside bank range [" + std::to_string(j_min_) + ", " +
              std::to_string(j_max_) + "]");
  return levels_[static_cast<std::size_t>(j - j_min_)];
}

double NeedletBank::filter_value(int j, int l) const {
  require(j >= j_min_ && j <= j_max_, errc::invalid_index, "scale outside bank range");
  if (l < std::abs(spin_)) return 0.0;
  const double xi = std::sqrt(static_cast<double>(eigenvalue_int(l, spin_))) / std::pow(filter_.B(), j);
  return filter_.b(xi);
}

NeedletBank build_bank(const NeedletFilter& filter, int spin, int j_max) {
  return NeedletBank(filter, spin, j_max);
}

std::vector<double> NeedletCoeffs::beta_e(int j) const {
  require(kind == needlet_kind::mixed, errc::invalid_input,
          "electric view is defined for mixed coefficients only");
  const auto& b = level(j);
  std::vector<double> out(b.size());
  for (std::size_t k = 0; k < b.size(); ++k) out[k] = b[k].real();
  return out;
}

std::vector<double> NeedletCoeffs::beta_m(int j) const {
  require(kind == needlet_kind::mixed, errc::invalid_input,
          "magnetic view is defined for mixed coefficients only");
  const auto& b = level(j);
  std::vector<double> out(b.size());
  for (std::size_t k = 0; k < b.size(); ++k) out[k] = b[k].imag();
  return out;
}

double NeedletCoeffs::energy() const {
  double e = 0.0;
  for (const auto& lev : beta)
    for (const auto& v : lev) e += std::norm(v);
  return e;
}

namespace {

// Filter the source table into the level band, optionally re-tagged at spin 0
// so the synthesis step pairs it with scalar harmonics.  Degrees below |s|
// never enter: either the source has no such rows, or (scalar companion) they
// are dropped by construction.
AlmSet filtered_source(const AlmSet& src, const NeedletBank& bank, int j, bool scalar) {
  const int lmax_f = std::min(src.lmax(), bank.level(j).bandlimit);
  AlmSet g(scalar ? 0 : bank.spin(), lmax_f);
  const int l0 = std::max(std::abs(bank.spin()), src.lmin());
  for (int l = l0; l <= lmax_f; ++l) {
    const double fl = bank.filter_value(j, l);
    if (fl == 0.0) continue;
    for (int m = -l; m <= l; ++m) g.at(l, m) = fl * src.at(l, m);
  }
  return g;
}

std::vector<std::complex<double>> level_beta(const AlmSet& src, const NeedletBank& bank, int j,
                                             bool scalar, bool direct = false) {
  const NeedletLevel& lev = bank.level(j);
  const SpinMap v = synthesize(filtered_source(src, bank, j, scalar), lev.grid, direct);
  std::vector<std::complex<double>> beta(v.values.size());
  for (std::size_t k = 0; k < beta.size(); ++k)
    beta[k] = std::sqrt(lev.grid->point_weight(lev.grid->ring_of(k))) * v.values[k];
  return beta;
}

} // namespace

std::vector<std::complex<double>> needlet_analyze_level(const AlmSet& alm, const NeedletBank& bank,
                                                        needlet_kind kind, int j, bool direct) {
  require(alm.spin() == bank.spin(), errc::invalid_input,
          "needlet analysis requires the table spin to match the bank spin");
  return level_beta(alm, bank, j, kind == needlet_kind::mixed, direct);
}

NeedletCoeffs needlet_analyze(const AlmSet& alm, const NeedletBank& bank, needlet_kind kind) {
  require(alm.spin() == bank.spin(), errc::invalid_input,
          "needlet analysis requires the table spin to match the bank spin");
  require(alm.lmax() <= bank.coverage_lmax(), errc::truncation,
          "bank with j_max " + std::to_string(bank.j_max()) + " covers degrees up to " +
              std::to_string(bank.coverage_lmax()) + ", table reaches " + std::to_string(alm.lmax()));
  NeedletCoeffs c;
  c.kind = kind;
  c.spin = bank.spin();
  c.j_min = bank.j_min();
  c.beta.reserve(static_cast<std::size_t>(bank.j_max() - bank.j_min()) + 1);
  for (int j = bank.j_min(); j <= bank.j_max(); ++j)
    c.beta.push_back(level_beta(alm, bank, j, kind == needlet_kind::mixed));
  return c;
}

NeedletCoeffs analyze_companion_scalar(const AlmSet& alm0, const NeedletBank& bank) {
  require(alm0.spin() == 0, errc::invalid_input, "companion channel takes a spin-0 table");
  require(alm0.lmax() <= bank.coverage_lmax(), errc::truncation,
          "bank with j_max " + std::to_string(bank.j_max()) + " covers degrees up to " +
              std::to_string(bank.coverage_lmax()) + ", table reaches " + std::to_string(alm0.lmax()));
  NeedletCoeffs c;
  c.kind = needlet_kind::mixed;
  c.spin = 0;
  c.j_min = bank.j_min();
  c.beta.reserve(static_cast<std::size_t>(bank.j_max() - bank.j_min()) + 1);
  for (int j = bank.j_min(); j <= bank.j_max(); ++j) c.beta.push_back(level_beta(alm0, bank, j, true));
  return c;
}

std::vector<std::complex<double>> analyze_companion_scalar_level(const AlmSet& alm0,
                                                                 const NeedletBank& bank, int j,
                                                                 bool direct) {
  require(alm0.spin() == 0, errc::invalid_input, "companion channel takes a spin-0 table");
  return level_beta(alm0, bank, j, true, direct);
}

AlmSet needlet_synthesize(const NeedletCoeffs& coeffs, const NeedletBank& bank, bool direct) {
  require(coeffs.j_min == bank.j_min() && coeffs.j_max() == bank.j_max(), errc::invalid_input,
          "coefficient scales do not match the bank");
  if (coeffs.kind == needlet_kind::spin)
    require(coeffs.spin == bank.spin(), errc::invalid_input,
            "spin-kind coefficients must carry the bank spin");
  else
    require(coeffs.spin == bank.spin() || coeffs.spin == 0, errc::invalid_input,
            "mixed coefficients synthesize to the bank spin or to spin 0");
  const int s = bank.spin();
  const int as = std::abs(s);
  const bool scalar = coeffs.kind == needlet_kind::mixed;
  AlmSet out(coeffs.spin, bank.level(bank.j_max()).bandlimit);
  for (int j = bank.j_min(); j <= bank.j_max(); ++j) {
    const NeedletLevel& lev = bank.level(j);
    const auto& b = coeffs.level(j);
    require(b.size() == lev.grid->npoints(), errc::invalid_input,
            "level " + std::to_string(j) + " has " + std::to_string(b.size()) + " coefficients, grid has " +
                std::to_string(lev.grid->npoints()));
    SpinMap v(scalar ? 0 : s, lev.grid);
    for (std::size_t k = 0; k < b.size(); ++k)
      v.values[k] = b[k] / std::sqrt(lev.grid->point_weight(lev.grid->ring_of(k)));
    const AlmSet a = analyze(v, lev.bandlimit, direct);
    for (int l = as; l <= lev.bandlimit; ++l) {
      const double fl = bank.filter_value(j, l);
      if (fl == 0.0) continue;
      for (int m = -l; m <= l; ++m) out.at(l, m) += fl * a.at(l, m);
    }
  }
  return out;
}

AlmSet needlet_alm(const NeedletBank& bank, needlet_kind kind, int j, std::size_t k) {
  const NeedletLevel& lev = bank.level(j);
  require(k < lev.grid->npoints(), errc::invalid_index, "needlet center index out of range");
  const int s = bank.spin();
  const int c = kind == needlet_kind::mixed ? 0 : s; // harmonic spin at the center
  const int L = lev.bandlimit;
  const double theta = lev.grid->theta(lev.grid->ring_of(k));
  const double phi = lev.grid->phi(lev.grid->phi_index_of(k));
  const double sqlam = std::sqrt(lev.grid->point_weight(lev.grid->ring_of(k)));

  AlmSet psi(s, L);
  WignerColumns cols(-c, L);
  std::vector<double> dcol(static_cast<std::size_t>(L) + 1);
  for (int m = -L; m <= L; ++m) {
    const int l0 = std::max({std::abs(m), std::abs(c), std::abs(s)});
    if (l0 > L) continue;
    cols.column(m, theta, dcol.data());
    const int crow = cols.lmin(m);
    const double a = m * phi;
    const std::complex<double> ph(std::cos(a), std::sin(a));
    for (int l = l0; l <= L; ++l) {
      const double fl = bank.filter_value(j, l);
      if (fl == 0.0) continue;
      const std::complex<double> y =
          mplus_sign(m) * std::sqrt((2.0 * l + 1.0) / (4.0 * kPi)) * dcol[l - crow] * ph;
      psi.at(l, m) = sqlam * fl * std::conj(y);
    }
  }
  return psi;
}

std::vector<std::complex<double>> eval_needlet(const NeedletBank& bank, needlet_kind kind, int j,
                                               std::size_t k,
                                               const std::vector<std::pair<double, double>>& points) {
  const AlmSet psi = needlet_alm(bank, kind, j, k);
  std::vector<std::complex<double>> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) out[i] = eval_point(psi, points[i].first, points[i].second);
  return out;
}

double qj_multiplier(const NeedletFilter& filter, int j, int s, int l, bool via_scalar_shift) {
  require(j >= 0, errc::invalid_parameter, "block scale must be >= 0");
  require(l >= 0, errc::invalid_index, "degree must be >= 0");
  const int as = std::abs(s);
  if (l < as) return 0.0;
  const std::int64_t e = via_scalar_shift
                             ? static_cast<std::int64_t>(l) * (l + 1) - static_cast<std::int64_t>(as) * (as + 1)
                             : eigenvalue_int(l, s);
  return filter.b2(std::sqrt(static_cast<double>(e)) / std::pow(filter.B(), j));
}

AlmSet qj_apply(const AlmSet& alm, const NeedletFilter& filter, int j) {
  AlmSet out(alm.spin(), alm.lmax());
  for (int l = alm.lmin(); l <= alm.lmax(); ++l) {
    const double f = qj_multiplier(filter, j, alm.spin(), l);
    if (f == 0.0) continue;
    for (int m = -l; m <= l; ++m) out.at(l, m) = f * alm.at(l, m);
  }
  return out;
}

// Low-pass multiplier as the running sum of the block windows up to scale N.
// Summed in increasing j so that pn(N) == pn(N-1) + q(N) holds bitwise; the
// window list below N's start is empty or the same for both.
double pn_multiplier(const NeedletFilter& filter, int N, int s, int l) {
  require(N >= 0, errc::invalid_parameter, "low-pass scale must be >= 0");
  require(l >= 0, errc::invalid_index, "degree must be >= 0");
  const int as = std::abs(s);
  if (l <= as) return 0.0; // l == |s| is excluded from the needlet subspace
  const double xi = std::sqrt(static_cast<double>(eigenvalue_int(l, s)));
  const int jc = static_cast<int>(std::floor(std::log(xi) / std::log(filter.B())));
  double sum = 0.0;
  for (int j = jc - 2; j <= N; ++j) sum += filter.b2(xi / std::pow(filter.B(), j));
  return sum;
}

AlmSet pn_apply(const AlmSet& alm, const NeedletFilter& filter, int N) {
  require(N >= 0, errc::invalid_parameter, "low-pass scale must be >= 0");
  AlmSet out(alm.spin(), alm.lmax());
  for (int l = alm.lmin(); l <= alm.lmax(); ++l) {
    const double f = pn_multiplier(filter, N, alm.spin(), l);
    if (f == 0.0) continue;
    for (int m = -l; m <= l; ++m) out.at(l, m) = f * alm.at(l, m);
  }
  return out;
}

} // namespace spinlet
