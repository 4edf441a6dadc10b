#include "spinlet/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "spinlet/rng.hpp"

namespace spinlet {

namespace {

constexpr double kPi = std::numbers::pi;

inline double mplus_sign(int m) { return (m > 0 && (m & 1)) ? -1.0 : 1.0; }

} // namespace

void PowerSpectra::validate() const {
  const std::size_t n = c_t.size();
  require(n > 0, errc::invalid_spectra, "empty spectra");
  require(c_e.size() == n && c_m.size() == n && c_te.size() == n && c_tm.size() == n,
          errc::invalid_spectra, "spectra channels differ in length");
  for (std::size_t l = 0; l < n; ++l) {
    const bool finite = std::isfinite(c_t[l]) && std::isfinite(c_e[l]) && std::isfinite(c_m[l]) &&
                        std::isfinite(c_te[l]) && std::isfinite(c_tm[l]);
    require(finite, errc::invalid_spectra, "non-finite spectrum value at l=" + std::to_string(l));
    require(c_t[l] >= 0.0 && c_e[l] >= 0.0 && c_m[l] >= 0.0, errc::invalid_spectra,
            "negative auto spectrum at l=" + std::to_string(l));
    // Pairwise Schur admissibility, with slack for round-tripped decimals.
    const double slack = 1.0 + 1e-12;
    require(c_te[l] * c_te[l] <= c_t[l] * c_e[l] * slack + 1e-300, errc::invalid_spectra,
            "cross spectrum TE exceeds the Schur bound at l=" + std::to_string(l));
    require(c_tm[l] * c_tm[l] <= c_t[l] * c_m[l] * slack + 1e-300, errc::invalid_spectra,
            "cross spectrum TM exceeds the Schur bound at l=" + std::to_string(l));
  }
}

PowerSpectra RegularSpectrumModel::generate(int lmax) const {
  require(alpha > 2.0, errc::invalid_parameter, "spectral decay exponent must exceed 2");
  require(amplitude > 0.0, errc::invalid_parameter, "spectral amplitude must be positive");
  require(lmin >= 1, errc::invalid_parameter, "spectral pivot degree must be >= 1");
  require(te_fraction * te_fraction + tm_fraction * tm_fraction <= 1.0, errc::invalid_parameter,
          "cross fractions must satisfy te^2 + tm^2 <= 1 for an admissible joint covariance");
  require(lmax >= 0, errc::invalid_parameter, "lmax must be >= 0");
  PowerSpectra s;
  const std::size_t n = static_cast<std::size_t>(lmax) + 1;
  s.c_t.resize(n);
  s.c_e.resize(n);
  s.c_m.resize(n);
  s.c_te.resize(n);
  s.c_tm.resize(n);
  for (int l = 0; l <= lmax; ++l) {
    const double c = amplitude * std::pow(static_cast<double>(std::max(l, lmin)), -alpha);
    s.c_t[l] = s.c_e[l] = s.c_m[l] = c;
    s.c_te[l] = te_fraction * c;
    s.c_tm[l] = tm_fraction * c;
  }
  return s;
}

namespace {

// Lower Cholesky factor of a symmetric 3x3 PSD matrix, tolerating zero modes
// (a vanished channel).  Genuine indefiniteness reports the degree.
std::array<double, 9> chol3(const double m[3][3], int l) {
  std::array<double, 9> L{};
  const double scale = std::max({m[0][0], m[1][1], m[2][2], 0.0});
  const double tol = 1e-12 * scale + 1e-300;
  for (int i = 0; i < 3; ++i) {
    double d = m[i][i];
    for (int k = 0; k < i; ++k) d -= L[static_cast<std::size_t>(3 * i + k)] * L[static_cast<std::size_t>(3 * i + k)];
    require(d > -1e-9 * scale - 1e-300, errc::invalid_spectra,
            "joint spectral matrix is not positive semidefinite at l=" + std::to_string(l));
    if (d <= tol) {
      // Zero mode: the corresponding rows must carry no residual coupling.
      for (int r = i + 1; r < 3; ++r) {
        double v = m[r][i];
        for (int k = 0; k < i; ++k) v -= L[static_cast<std::size_t>(3 * r + k)] * L[static_cast<std::size_t>(3 * i + k)];
        require(std::abs(v) <= std::sqrt(tol * scale) + 1e-300, errc::invalid_spectra,
                "cross coupling into a zero-variance channel at l=" + std::to_string(l));
      }
      continue;
    }
    const double root = std::sqrt(d);
    L[static_cast<std::size_t>(4 * i)] = root;
    for (int r = i + 1; r < 3; ++r) {
      double v = m[r][i];
      for (int k = 0; k < i; ++k) v -= L[static_cast<std::size_t>(3 * r + k)] * L[static_cast<std::size_t>(3 * i + k)];
      L[static_cast<std::size_t>(3 * r + i)] = v / root;
    }
  }
  return L;
}

inline std::array<double, 3> apply3(const std::array<double, 9>& L, const std::array<double, 3>& g) {
  return {L[0] * g[0], L[3] * g[0] + L[4] * g[1], L[6] * g[0] + L[7] * g[1] + L[8] * g[2]};
}

} // namespace

SimulatedFields simulate_fields(const PowerSpectra& spectra, int s, int lmax, std::uint64_t seed,
                                std::uint32_t replicate) {
  spectra.validate();
  require(s >= 0, errc::unsupported_spin, "simulation requires spin >= 0");
  require(lmax >= s, errc::invalid_index, "lmax must reach the spin");
  require(lmax <= spectra.lmax(), errc::truncation,
          "spectra end at l=" + std::to_string(spectra.lmax()) + ", requested lmax=" + std::to_string(lmax));

  const Philox4x32 rng(seed);
  SimulatedFields out{AlmSet(0, lmax), EMModes{AlmSet(s, lmax), AlmSet(s, lmax)}};
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

  for (int l = 0; l <= lmax; ++l) {
    const double m3[3][3] = {{spectra.c_t[l], spectra.c_te[l], spectra.c_tm[l]},
                             {spectra.c_te[l], spectra.c_e[l], 0.0},
                             {spectra.c_tm[l], 0.0, spectra.c_m[l]}};
    const std::array<double, 9> L = chol3(m3, l);
    for (int m = 0; m <= l; ++m) {
      GaussianStream gs(rng, static_cast<std::uint32_t>(l), static_cast<std::uint32_t>(m), replicate);
      if (m == 0) {
        // Diagonal row: real with the full covariance.
        const std::array<double, 3> x = apply3(L, {gs.next(), gs.next(), gs.next()});
        out.t.at(l, 0) = x[0];
        if (l >= s) {
          out.em.e.at(l, 0) = x[1];
          out.em.m.at(l, 0) = x[2];
        }
        continue;
      }
      // Proper complex row: real and imaginary parts independent, each with
      // half the covariance; draw order (T,E,M) real then (T,E,M) imaginary.
      const std::array<double, 3> xr = apply3(L, {gs.next(), gs.next(), gs.next()});
      const std::array<double, 3> xi = apply3(L, {gs.next(), gs.next(), gs.next()});
      const auto coeff = [&](int c) {
        return std::complex<double>(inv_sqrt2 * xr[static_cast<std::size_t>(c)],
                                    inv_sqrt2 * xi[static_cast<std::size_t>(c)]);
      };
      const std::complex<double> at = coeff(0), ae = coeff(1), am = coeff(2);
      out.t.at(l, m) = at;
      out.t.at(l, -m) = std::conj(at);
      if (l >= s) {
        out.em.e.at(l, m) = ae;
        out.em.e.at(l, -m) = std::conj(ae);
        out.em.m.at(l, m) = am;
        out.em.m.at(l, -m) = std::conj(am);
      }
    }
  }
  return out;
}

double gamma_hat_level(const std::vector<std::complex<double>>& spin_beta,
                       const std::vector<std::complex<double>>& scalar_beta, cross_mode mode) {
  require(spin_beta.size() == scalar_beta.size(), errc::invalid_input,
          "estimator channels carry different center counts");
  double sum = 0.0;
  for (std::size_t k = 0; k < spin_beta.size(); ++k) {
    const double spart = mode == cross_mode::te ? spin_beta[k].real() : spin_beta[k].imag();
    sum += spart * scalar_beta[k].real();
  }
  return sum;
}

GammaEstimate gamma_hat(const NeedletCoeffs& spin_coeffs, const NeedletCoeffs& scalar_coeffs, int j,
                        cross_mode mode) {
  require(spin_coeffs.kind == needlet_kind::mixed && spin_coeffs.spin != 0, errc::invalid_input,
          "estimator needs mixed coefficients of the spin channel");
  require(scalar_coeffs.kind == needlet_kind::mixed && scalar_coeffs.spin == 0, errc::invalid_input,
          "estimator needs scalar companion coefficients");
  require(spin_coeffs.j_min == scalar_coeffs.j_min && spin_coeffs.j_max() == scalar_coeffs.j_max(),
          errc::invalid_input, "estimator channels cover different scales");
  GammaEstimate est;
  est.j = j;
  est.mode = mode;
  est.value = gamma_hat_level(spin_coeffs.level(j), scalar_coeffs.level(j), mode);
  est.n_centers = spin_coeffs.level(j).size();
  return est;
}

GammaMoments gamma_moments(const PowerSpectra& spectra, const NeedletBank& bank, int j, cross_mode mode) {
  spectra.validate();
  const int L = bank.level(j).bandlimit;
  require(spectra.lmax() >= L, errc::truncation,
          "spectra end at l=" + std::to_string(spectra.lmax()) + ", scale support reaches " +
              std::to_string(L));
  GammaMoments mom;
  for (int l = std::abs(bank.spin()); l <= L; ++l) {
    const double b2v = qj_multiplier(bank.filter(), j, bank.spin(), l);
    if (b2v == 0.0) continue;
    const double cta = mode == cross_mode::te ? spectra.c_te[l] : spectra.c_tm[l];
    const double ca = mode == cross_mode::te ? spectra.c_e[l] : spectra.c_m[l];
    mom.mean += b2v * (2.0 * l + 1.0) * cta;
    mom.var += b2v * b2v * (2.0 * l + 1.0) * (spectra.c_t[l] * ca + cta * cta);
  }
  return mom;
}

namespace {

double beta_cov_sum(const PowerSpectra& spectra, const NeedletBank& bank, int j, field_channel channel,
                    double x) {
  const int L = bank.level(j).bandlimit;
  require(spectra.lmax() >= L, errc::truncation,
          "spectra end at l=" + std::to_string(spectra.lmax()) + ", scale support reaches " +
              std::to_string(L));
  // Legendre recursion alongside the degree sum.
  double p_prev = 1.0, p_cur = x;
  double sum = 0.0;
  for (int l = 0; l <= L; ++l) {
    const double pl = l == 0 ? 1.0 : p_cur; // p_cur holds P_l for l >= 1
    if (l >= std::abs(bank.spin())) {
      const double b2v = qj_multiplier(bank.filter(), j, bank.spin(), l);
      if (b2v != 0.0) {
        const double c = channel == field_channel::t
                             ? spectra.c_t[l]
                             : (channel == field_channel::e ? spectra.c_e[l] : spectra.c_m[l]);
        sum += b2v * c * (2.0 * l + 1.0) * pl;
      }
    }
    // Advance P_{l+1} = ((2l+1) x P_l - l P_{l-1}) / (l+1).
    if (l >= 1) {
      const double p_next = ((2.0 * l + 1.0) * x * p_cur - l * p_prev) / (l + 1.0);
      p_prev = p_cur;
      p_cur = p_next;
    }
  }
  return sum;
}

} // namespace

double beta_covariance(const PowerSpectra& spectra, const NeedletBank& bank, int j,
                       field_channel channel, double dist, double lam1, double lam2) {
  require(lam1 >= 0.0 && lam2 >= 0.0, errc::invalid_parameter, "cubature weights must be nonnegative");
  require(dist >= 0.0 && dist <= kPi, errc::invalid_parameter, "geodesic distance must lie in [0, pi]");
  return std::sqrt(lam1 * lam2) * beta_cov_sum(spectra, bank, j, channel, std::cos(dist)) / (4.0 * kPi);
}

double beta_correlation(const PowerSpectra& spectra, const NeedletBank& bank, int j,
                        field_channel channel, double dist) {
  require(dist >= 0.0 && dist <= kPi, errc::invalid_parameter, "geodesic distance must lie in [0, pi]");
  const double denom = beta_cov_sum(spectra, bank, j, channel, 1.0);
  require(denom > 0.0, errc::invalid_input, "channel carries no power in this scale's support");
  return beta_cov_sum(spectra, bank, j, channel, std::cos(dist)) / denom;
}

CltSummary clt_experiment(const PowerSpectra& spectra, const NeedletBank& bank, int j, cross_mode mode,
                          int n_reps, std::uint64_t seed) {
  require(n_reps >= 8, errc::invalid_parameter, "need at least 8 replicates");
  const GammaMoments mom = gamma_moments(spectra, bank, j, mode);
  require(mom.var > 0.0, errc::invalid_input, "estimator variance vanishes under these spectra");
  const int L = bank.level(j).bandlimit;
  const int s = bank.spin();

  CltSummary out;
  out.analytic_mean = mom.mean;
  out.analytic_var = mom.var;
  out.samples.resize(static_cast<std::size_t>(n_reps));
  const double sd = std::sqrt(mom.var);
  for (int rep = 0; rep < n_reps; ++rep) {
    const SimulatedFields f = simulate_fields(spectra, s, L, seed, static_cast<std::uint32_t>(rep));
    const auto spin_beta = needlet_analyze_level(em_compose(f.em), bank, needlet_kind::mixed, j);
    const auto scalar_beta = analyze_companion_scalar_level(f.t, bank, j);
    out.samples[static_cast<std::size_t>(rep)] =
        (gamma_hat_level(spin_beta, scalar_beta, mode) - mom.mean) / sd;
  }

  // Central sample moments of the standardized values.
  const double n = static_cast<double>(n_reps);
  double mean = 0.0;
  for (double z : out.samples) mean += z;
  mean /= n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double z : out.samples) {
    const double d = z - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  require(m2 > 0.0, errc::invalid_input, "degenerate Monte Carlo sample");
  out.skewness = m3 / std::pow(m2, 1.5);
  out.ex_kurtosis = m4 / (m2 * m2) - 3.0;
  return out;
}

AlmSet empirical_alm(const std::vector<Observation>& obs, std::vector<double> weights, int spin,
                     int lmax) {
  require(!obs.empty(), errc::invalid_input, "no observations");
  if (weights.empty()) weights.assign(obs.size(), 4.0 * kPi / static_cast<double>(obs.size()));
  require(weights.size() == obs.size(), errc::invalid_input,
          "weights and observations differ in length");

  AlmSet out(spin, lmax);
  WignerColumns cols(-spin, lmax);
  std::vector<double> dcol(static_cast<std::size_t>(lmax) + 1);
  std::vector<double> pref(static_cast<std::size_t>(lmax) + 1);
  for (int l = 0; l <= lmax; ++l) pref[l] = std::sqrt((2.0 * l + 1.0) / (4.0 * kPi));

  for (std::size_t i = 0; i < obs.size(); ++i) {
    const Observation& o = obs[i];
    require(o.theta > 0.0 && o.theta < kPi, errc::chart_domain,
            "observation " + std::to_string(i) + " lies outside the open chart");
    for (int m = -lmax; m <= lmax; ++m) {
      const int l0 = std::max({std::abs(m), std::abs(spin)});
      if (l0 > lmax) continue;
      cols.column(m, o.theta, dcol.data());
      const int crow = cols.lmin(m);
      const double a = -m * o.phi;
      const std::complex<double> c =
          weights[i] * o.value * (mplus_sign(m) * std::complex<double>(std::cos(a), std::sin(a)));
      for (int l = l0; l <= lmax; ++l) out.at(l, m) += c * (pref[l] * dcol[l - crow]);
    }
  }
  return out;
}

std::complex<double> empirical_beta(const std::vector<Observation>& obs, std::vector<double> weights,
                                    const NeedletBank& bank, needlet_kind kind, int j, std::size_t k) {
  const NeedletLevel& lev = bank.level(j);
  require(k < lev.grid->npoints(), errc::invalid_index, "needlet center index out of range");
  const AlmSet emp = empirical_alm(obs, std::move(weights), bank.spin(), lev.bandlimit);
  return needlet_analyze_level(emp, bank, kind, j)[k];
}

DenoiseResult shrink_denoise(const std::vector<Observation>& obs, std::vector<double> weights,
                             const NeedletBank& bank, double c, double t_n) {
  require(c > 0.0 && t_n > 0.0, errc::invalid_parameter, "threshold factors must be positive");
  const AlmSet emp = empirical_alm(obs, std::move(weights), bank.spin(), bank.coverage_lmax());
  NeedletCoeffs coeffs = needlet_analyze(emp, bank, needlet_kind::mixed);

  DenoiseResult res;
  res.threshold = c * t_n;
  for (auto& lev : coeffs.beta) {
    for (auto& b : lev) {
      ++res.total;
      if (std::abs(b) > res.threshold)
        ++res.kept;
      else
        b = 0.0;
    }
  }
  res.alm = needlet_synthesize(coeffs, bank);
  return res;
}

} // namespace spinlet
