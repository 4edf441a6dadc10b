#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "spinlet/needlet.hpp"
#include "spinlet/rng.hpp"
#include "spinlet/sht.hpp"
#include "spinlet/stochastic.hpp"

using namespace spinlet;
using cd = std::complex<double>;

namespace {

constexpr double kPi = std::numbers::pi;

PowerSpectra flat_spectra(int lmax, double ct, double ce, double cm, double cte, double ctm) {
  PowerSpectra s;
  s.c_t.assign(static_cast<std::size_t>(lmax) + 1, ct);
  s.c_e.assign(static_cast<std::size_t>(lmax) + 1, ce);
  s.c_m.assign(static_cast<std::size_t>(lmax) + 1, cm);
  s.c_te.assign(static_cast<std::size_t>(lmax) + 1, cte);
  s.c_tm.assign(static_cast<std::size_t>(lmax) + 1, ctm);
  return s;
}

bool tables_equal(const AlmSet& a, const AlmSet& b) {
  if (a.spin() != b.spin() || a.lmax() != b.lmax()) return false;
  for (int l = a.lmin(); l <= a.lmax(); ++l)
    for (int m = -l; m <= l; ++m)
      if (a.at(l, m) != b.at(l, m)) return false;
  return true;
}

struct Welford {
  // streaming mean and central moments, plus enough for a variance SE
  std::vector<double> xs;
  void add(double x) { xs.push_back(x); }
  double mean() const {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / xs.size();
  }
  double var() const {
    const double mu = mean();
    double s = 0.0;
    for (double x : xs) s += (x - mu) * (x - mu);
    return s / (xs.size() - 1);
  }
  double se_mean() const { return std::sqrt(var() / xs.size()); }
  double se_var() const {
    // nonparametric: sqrt((m4 - m2^2)/n)
    const double mu = mean();
    double m2 = 0.0, m4 = 0.0;
    for (double x : xs) {
      const double d = (x - mu) * (x - mu);
      m2 += d;
      m4 += d * d;
    }
    m2 /= xs.size();
    m4 /= xs.size();
    return std::sqrt(std::max(m4 - m2 * m2, 0.0) / xs.size());
  }
};

} // namespace

TEST_CASE("spectra admissibility checks") {
  PowerSpectra ok = flat_spectra(4, 1.0, 0.5, 0.25, 0.6, -0.4);
  ok.validate(); // 0.36 <= 0.5, 0.16 <= 0.25

  PowerSpectra neg = ok;
  neg.c_e[2] = -1e-3;
  CHECK_THROWS_AS(neg.validate(), error);

  PowerSpectra schur = ok;
  schur.c_te[3] = 0.8; // 0.64 > 0.5
  CHECK_THROWS_AS(schur.validate(), error);

  PowerSpectra ragged = ok;
  ragged.c_tm.pop_back();
  CHECK_THROWS_AS(ragged.validate(), error);
}

TEST_CASE("power-law model generates the stated spectra") {
  RegularSpectrumModel m;
  m.alpha = 3.0;
  m.amplitude = 2.0;
  m.te_fraction = 0.5;
  m.tm_fraction = -0.25;
  m.lmin = 2;
  const PowerSpectra s = m.generate(10);
  s.validate();
  CHECK(s.lmax() == 10);
  for (int l = 0; l <= 10; ++l) {
    const double c = 2.0 * std::pow(static_cast<double>(std::max(l, 2)), -3.0);
    CHECK(s.c_t[l] == doctest::Approx(c).epsilon(1e-15));
    CHECK(s.c_e[l] == doctest::Approx(c).epsilon(1e-15));
    CHECK(s.c_m[l] == doctest::Approx(c).epsilon(1e-15));
    CHECK(s.c_te[l] == doctest::Approx(0.5 * c).epsilon(1e-15));
    CHECK(s.c_tm[l] == doctest::Approx(-0.25 * c).epsilon(1e-15));
  }

  RegularSpectrumModel bad = m;
  bad.alpha = 2.0;
  CHECK_THROWS_AS((void)bad.generate(5), error);
  bad = m;
  bad.amplitude = 0.0;
  CHECK_THROWS_AS((void)bad.generate(5), error);
  bad = m;
  bad.te_fraction = 0.9;
  bad.tm_fraction = 0.5; // 0.81 + 0.25 > 1
  CHECK_THROWS_AS((void)bad.generate(5), error);
  bad = m;
  bad.lmin = 0;
  CHECK_THROWS_AS((void)bad.generate(5), error);
}

TEST_CASE("simulation is deterministic, involutive, and prefix-stable") {
  RegularSpectrumModel model;
  model.te_fraction = 0.4;
  model.tm_fraction = 0.3;
  const PowerSpectra s32 = model.generate(32);

  const SimulatedFields a = simulate_fields(s32, 2, 16, 99, 1);
  const SimulatedFields b = simulate_fields(s32, 2, 16, 99, 1);
  CHECK(tables_equal(a.t, b.t));
  CHECK(tables_equal(em_compose(a.em), em_compose(b.em)));

  const SimulatedFields c = simulate_fields(s32, 2, 16, 99, 2);
  CHECK(!tables_equal(a.t, c.t));
  const SimulatedFields d = simulate_fields(s32, 2, 16, 100, 1);
  CHECK(!tables_equal(a.t, d.t));

  // extending the bandlimit only appends rows
  const SimulatedFields wide = simulate_fields(s32, 2, 32, 99, 1);
  for (int l = 0; l <= 16; ++l)
    for (int m = -l; m <= l; ++m) CHECK(wide.t.at(l, m) == a.t.at(l, m));
  for (int l = 2; l <= 16; ++l)
    for (int m = -l; m <= l; ++m) {
      CHECK(wide.em.e.at(l, m) == a.em.e.at(l, m));
      CHECK(wide.em.m.at(l, m) == a.em.m.at(l, m));
    }

  // the scalar channel and shared spin rows do not depend on the spin tag
  const SimulatedFields s3 = simulate_fields(s32, 3, 16, 99, 1);
  CHECK(tables_equal(s3.t, a.t));
  for (int l = 3; l <= 16; ++l)
    for (int m = -l; m <= l; ++m) {
      CHECK(s3.em.e.at(l, m) == a.em.e.at(l, m));
      CHECK(s3.em.m.at(l, m) == a.em.m.at(l, m));
    }

  // all tables satisfy the reality involution exactly
  for (int l = 0; l <= 16; ++l)
    for (int m = 0; m <= l; ++m) {
      CHECK(a.t.at(l, -m) == std::conj(a.t.at(l, m)));
      if (l >= 2) {
        CHECK(a.em.e.at(l, -m) == std::conj(a.em.e.at(l, m)));
        CHECK(a.em.m.at(l, -m) == std::conj(a.em.m.at(l, m)));
      }
    }

  // requesting more degrees than the spectra carry is refused
  CHECK_THROWS_AS((void)simulate_fields(s32, 2, 33, 1), error);
  CHECK_THROWS_AS((void)simulate_fields(s32, -1, 8, 1), error);
  CHECK_THROWS_AS((void)simulate_fields(s32, 4, 3, 1), error);
}

TEST_CASE("simulated tables reproduce the model covariances") {
  const int lmax = 8, n = 3000;
  const PowerSpectra sp = flat_spectra(lmax, 1.0, 0.8, 0.5, 0.4, -0.3);
  Welford tt, ee, mm, te, tm, em;
  for (int rep = 0; rep < n; ++rep) {
    const SimulatedFields f = simulate_fields(sp, 2, lmax, 12345, static_cast<std::uint32_t>(rep));
    for (int l = 5; l <= 8; ++l)
      for (int m = -l; m <= l; ++m) {
        const cd t = f.t.at(l, m), e = f.em.e.at(l, m), b = f.em.m.at(l, m);
        tt.add(std::norm(t));
        ee.add(std::norm(e));
        mm.add(std::norm(b));
        te.add((t * std::conj(e)).real());
        tm.add((t * std::conj(b)).real());
        em.add((e * std::conj(b)).real());
      }
  }
  CHECK(std::abs(tt.mean() - 1.0) < 5 * tt.se_mean());
  CHECK(std::abs(ee.mean() - 0.8) < 5 * ee.se_mean());
  CHECK(std::abs(mm.mean() - 0.5) < 5 * mm.se_mean());
  CHECK(std::abs(te.mean() - 0.4) < 5 * te.se_mean());
  CHECK(std::abs(tm.mean() + 0.3) < 5 * tm.se_mean());
  CHECK(std::abs(em.mean()) < 5 * em.se_mean()); // magnetic-electric cross excluded
}

TEST_CASE("degenerate admissible spectra factor through the zero pivot") {
  // electric channel perfectly correlated with the scalar one
  RegularSpectrumModel model;
  model.te_fraction = 1.0;
  const PowerSpectra sp = model.generate(8);
  const SimulatedFields f = simulate_fields(sp, 2, 8, 7);
  for (int l = 2; l <= 8; ++l) {
    const double ratio = std::sqrt(sp.c_e[l] / sp.c_t[l]);
    for (int m = -l; m <= l; ++m)
      CHECK(std::abs(f.em.e.at(l, m) - ratio * f.t.at(l, m)) <
            1e-12 * std::abs(f.t.at(l, m)) + 1e-300);
  }
}

TEST_CASE("pairwise-admissible but jointly indefinite spectra are rejected") {
  // both cross channels near their separate bounds cannot hold at once
  const PowerSpectra sp = flat_spectra(6, 1.0, 1.0, 1.0, 0.9, 0.9);
  sp.validate(); // the file contract only promises the pairwise bounds
  CHECK_THROWS_AS((void)simulate_fields(sp, 2, 6, 1), error);
  try {
    (void)simulate_fields(sp, 2, 6, 1);
  } catch (const error& e) {
    CHECK(e.kind() == errc::invalid_spectra);
  }
}

TEST_CASE("cross estimator arithmetic at one scale") {
  const std::vector<cd> spin_beta = {{1.0, 2.0}, {-0.5, 1.5}, {0.0, -3.0}};
  const std::vector<cd> scal_beta = {{2.0, 9.0}, {4.0, 9.0}, {1.0, 9.0}};
  // te pairs the real parts, tm pairs scalar-real with spin-imaginary
  CHECK(gamma_hat_level(spin_beta, scal_beta, cross_mode::te) ==
        doctest::Approx(1.0 * 2.0 - 0.5 * 4.0 + 0.0).epsilon(1e-15));
  CHECK(gamma_hat_level(spin_beta, scal_beta, cross_mode::tm) ==
        doctest::Approx(2.0 * 2.0 + 1.5 * 4.0 - 3.0 * 1.0).epsilon(1e-15));
  CHECK_THROWS_AS((void)gamma_hat_level(spin_beta, {{1.0, 0.0}}, cross_mode::te), error);
}

TEST_CASE("cross estimators agree with their analytic moments") {
  const NeedletBank bank = build_bank(NeedletFilter(2.0), 2, 4);
  const int j = 3, lj = bank.level(j).bandlimit;
  RegularSpectrumModel model;
  model.te_fraction = 0.5;
  model.tm_fraction = -0.3;
  const PowerSpectra sp = model.generate(lj);

  const GammaMoments mom_te = gamma_moments(sp, bank, j, cross_mode::te);
  const GammaMoments mom_tm = gamma_moments(sp, bank, j, cross_mode::tm);
  // mean and variance against direct degree sums
  {
    double mean = 0.0, var = 0.0;
    for (int l = 2; l <= lj; ++l) {
      const double b2 = qj_multiplier(bank.filter(), j, 2, l);
      mean += b2 * (2 * l + 1) * sp.c_te[l];
      var += b2 * b2 * (2 * l + 1) * (sp.c_t[l] * sp.c_e[l] + sp.c_te[l] * sp.c_te[l]);
    }
    CHECK(mom_te.mean == doctest::Approx(mean).epsilon(1e-13));
    CHECK(mom_te.var == doctest::Approx(var).epsilon(1e-13));
  }

  const int n = 400;
  Welford g_te, g_tm, be_var, be_cov;
  const auto& lev = bank.level(j);
  const std::size_t k1 = lev.grid->npoints() / 2;
  const std::size_t k2 = k1 + 5; // same ring, shifted in azimuth
  for (int rep = 0; rep < n; ++rep) {
    const SimulatedFields f = simulate_fields(sp, 2, lj, 777, static_cast<std::uint32_t>(rep));
    const AlmSet spin_field = em_compose(f.em);
    const auto sb = needlet_analyze_level(spin_field, bank, needlet_kind::mixed, j);
    const auto tb = analyze_companion_scalar_level(f.t, bank, j);
    g_te.add(gamma_hat_level(sb, tb, cross_mode::te));
    g_tm.add(gamma_hat_level(sb, tb, cross_mode::tm));
    be_var.add(sb[k1].real());
    be_cov.add(sb[k1].real() * sb[k2].real());
  }
  CHECK(std::abs(g_te.mean() - mom_te.mean) < 5 * g_te.se_mean());
  CHECK(std::abs(g_te.var() - mom_te.var) < 5 * g_te.se_var());
  CHECK(std::abs(g_tm.mean() - mom_tm.mean) < 5 * g_tm.se_mean());
  CHECK(std::abs(g_tm.var() - mom_tm.var) < 5 * g_tm.se_var());

  // electric coefficient variance and two-point covariance
  const double lam1 = lev.grid->point_weight(lev.grid->ring_of(k1));
  const double v_ref = beta_covariance(sp, bank, j, field_channel::e, 0.0, lam1, lam1);
  CHECK(std::abs(be_var.var() - v_ref) < 5 * be_var.se_var());
  const double th = lev.grid->theta(lev.grid->ring_of(k1));
  const double dph = lev.grid->phi(lev.grid->phi_index_of(k2)) - lev.grid->phi(lev.grid->phi_index_of(k1));
  const double dist = std::acos(
      std::min(1.0, std::cos(th) * std::cos(th) + std::sin(th) * std::sin(th) * std::cos(dph)));
  const double c_ref = beta_covariance(sp, bank, j, field_channel::e, dist, lam1, lam1);
  CHECK(std::abs(be_cov.mean() - c_ref) < 5 * be_cov.se_mean());
}

TEST_CASE("coefficient covariance matches an independent Legendre sum") {
  const NeedletBank bank = build_bank(NeedletFilter(2.0), 2, 4);
  RegularSpectrumModel model;
  model.te_fraction = 0.2;
  const PowerSpectra sp = model.generate(bank.level(4).bandlimit);
  for (const int j : {2, 3, 4}) {
    for (const double dist : {0.0, 0.3, 1.1, 2.9}) {
      const double lam1 = 0.007, lam2 = 0.011;
      double ref = 0.0;
      for (int l = 2; l <= bank.level(j).bandlimit; ++l) {
        const double b = bank.filter_value(j, l);
        ref += b * b * sp.c_e[l] * (2 * l + 1) / (4 * kPi) * std::legendre(l, std::cos(dist));
      }
      ref *= std::sqrt(lam1 * lam2);
      const double got = beta_covariance(sp, bank, j, field_channel::e, dist, lam1, lam2);
      CHECK(got == doctest::Approx(ref).epsilon(1e-11));
    }
    CHECK(beta_correlation(sp, bank, j, field_channel::e, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    // correlations decay with distance at fixed scale
    CHECK(std::abs(beta_correlation(sp, bank, j, field_channel::e, 1.0)) < 1.0);
  }
  // the channel selects its own spectrum
  PowerSpectra zt = sp;
  for (auto& v : zt.c_t) v = 0.0;
  for (auto& v : zt.c_te) v = 0.0;
  for (auto& v : zt.c_tm) v = 0.0;
  CHECK(beta_covariance(zt, bank, 3, field_channel::t, 0.4, 1.0, 1.0) == 0.0);
  CHECK(beta_covariance(zt, bank, 3, field_channel::e, 0.4, 1.0, 1.0) != 0.0);
  CHECK_THROWS_AS((void)beta_covariance(sp, bank, 3, field_channel::e, -0.1, 1.0, 1.0), error);
  CHECK_THROWS_AS((void)beta_covariance(sp, bank, 3, field_channel::e, 4.0, 1.0, 1.0), error);
}

TEST_CASE("standardized estimator study returns coherent statistics") {
  const NeedletBank bank = build_bank(NeedletFilter(2.0), 2, 4);
  const int j = 3;
  RegularSpectrumModel model;
  model.te_fraction = 0.5;
  const PowerSpectra sp = model.generate(bank.level(j).bandlimit);
  const CltSummary s = clt_experiment(sp, bank, j, cross_mode::te, 150, 31);
  CHECK(s.samples.size() == 150);
  const GammaMoments mom = gamma_moments(sp, bank, j, cross_mode::te);
  CHECK(s.analytic_mean == doctest::Approx(mom.mean).epsilon(1e-15));
  CHECK(s.analytic_var == doctest::Approx(mom.var).epsilon(1e-15));
  double mu = 0.0;
  for (double x : s.samples) mu += x;
  mu /= s.samples.size();
  CHECK(std::abs(mu) < 5.0 / std::sqrt(150.0));
  CHECK(std::isfinite(s.skewness));
  CHECK(std::isfinite(s.ex_kurtosis));
  CHECK(std::abs(s.skewness) < 1.5);
  CHECK_THROWS_AS((void)clt_experiment(sp, bank, j, cross_mode::te, 4, 1), error);
}

TEST_CASE("scattered-point tables are exact on cubature designs") {
  const int L = 12;
  const auto grid = make_grid(L);
  std::mt19937 rng(8);
  std::normal_distribution<double> g(0.0, 1.0);
  AlmSet a(2, L);
  for (int l = 2; l <= L; ++l)
    for (int m = -l; m <= l; ++m) a.at(l, m) = cd(g(rng), g(rng));
  const SpinMap f = synthesize(a, grid);
  std::vector<Observation> obs(grid->npoints());
  std::vector<double> w(grid->npoints());
  for (std::size_t k = 0; k < obs.size(); ++k) {
    obs[k] = {grid->theta(grid->ring_of(k)), grid->phi(grid->phi_index_of(k)), f.values[k]};
    w[k] = grid->point_weight(grid->ring_of(k));
  }
  const AlmSet emp = empirical_alm(obs, w, 2, L);
  for (int l = 2; l <= L; ++l)
    for (int m = -l; m <= l; ++m) CHECK(std::abs(emp.at(l, m) - a.at(l, m)) < 1e-10);

  // default weights: equal mass 4pi/n
  const AlmSet emp_def = empirical_alm(obs, {}, 2, 4);
  CHECK(emp_def.lmax() == 4);

  std::vector<Observation> bad = {{0.0, 0.0, cd(1.0, 0.0)}};
  CHECK_THROWS_AS((void)empirical_alm(bad, {}, 0, 2), error);
  CHECK_THROWS_AS((void)empirical_alm(obs, std::vector<double>(3, 1.0), 2, 4), error);
}

TEST_CASE("scattered-point needlet coefficients match the direct kernel sum") {
  const NeedletBank bank = build_bank(NeedletFilter(2.0), 2, 3);
  const int L = bank.coverage_lmax();
  const auto grid = make_grid(L);
  std::mt19937 rng(15);
  std::normal_distribution<double> g(0.0, 1.0);
  AlmSet a(2, L);
  for (int l = 2; l <= L; ++l)
    for (int m = -l; m <= l; ++m) a.at(l, m) = cd(g(rng), g(rng));
  const SpinMap f = synthesize(a, grid);
  std::vector<Observation> obs(grid->npoints());
  std::vector<double> w(grid->npoints());
  std::vector<std::pair<double, double>> pts(grid->npoints());
  for (std::size_t k = 0; k < obs.size(); ++k) {
    obs[k] = {grid->theta(grid->ring_of(k)), grid->phi(grid->phi_index_of(k)), f.values[k]};
    w[k] = grid->point_weight(grid->ring_of(k));
    pts[k] = {obs[k].theta, obs[k].phi};
  }
  for (const int j : {2, 3}) {
    const std::size_t k = bank.level(j).grid->npoints() / 4;
    for (const needlet_kind kind : {needlet_kind::spin, needlet_kind::mixed}) {
      const cd via_table = empirical_beta(obs, w, bank, kind, j, k);
      const auto psi = eval_needlet(bank, kind, j, k, pts);
      cd direct(0.0, 0.0);
      for (std::size_t i = 0; i < obs.size(); ++i) direct += w[i] * obs[i].value * std::conj(psi[i]);
      CHECK(std::abs(via_table - direct) < 1e-10);
    }
  }
}

TEST_CASE("thresholded reconstruction recovers noiseless fields and beats the raw one") {
  const NeedletBank bank = build_bank(NeedletFilter(2.0), 2, 4);
  RegularSpectrumModel model;
  const PowerSpectra sp = model.generate(10);
  const SimulatedFields fields = simulate_fields(sp, 2, 10, 55);
  const AlmSet truth = em_compose(fields.em);
  const auto grid = bank.level(bank.j_max()).grid;
  const SpinMap clean = synthesize(truth, grid);
  std::vector<Observation> obs(grid->npoints());
  std::vector<double> w(grid->npoints());
  for (std::size_t k = 0; k < obs.size(); ++k) {
    obs[k] = {grid->theta(grid->ring_of(k)), grid->phi(grid->phi_index_of(k)), clean.values[k]};
    w[k] = grid->point_weight(grid->ring_of(k));
  }

  // noiseless: with a threshold below every surviving coefficient the full
  // frame reconstruction comes back
  const DenoiseResult res = shrink_denoise(obs, w, bank, 3.0, 1e-12);
  CHECK(res.threshold == doctest::Approx(3e-12).epsilon(1e-15));
  CHECK(res.total > 0);
  CHECK(res.kept <= res.total);
  double worst = 0.0;
  for (int l = 3; l <= 10; ++l)
    for (int m = -l; m <= l; ++m) worst = std::max(worst, std::abs(res.alm.at(l, m) - truth.at(l, m)));
  CHECK(worst < 1e-6);

  // noisy: a faint localized bump under heavy noise — zeroing the noise-only
  // coefficients must beat the unthresholded frame round trip
  AlmSet bump = needlet_alm(bank, needlet_kind::mixed, 3, bank.level(3).grid->npoints() / 2);
  for (int l = bump.lmin(); l <= bump.lmax(); ++l)
    for (int m = -l; m <= l; ++m) bump.at(l, m) *= 10.0;
  const SpinMap bump_map = synthesize(bump, grid);
  Philox4x32 noise_rng(5);
  const double sigma = 1.5;
  std::vector<Observation> noisy = obs;
  for (std::size_t k = 0; k < noisy.size(); ++k) {
    GaussianStream gs(noise_rng, 0x7fffffffu, static_cast<std::uint32_t>(k), 0);
    noisy[k].value = bump_map.values[k] + sigma / std::numbers::sqrt2 * cd(gs.next(), gs.next());
  }
  const double t_n = sigma * std::sqrt(4 * kPi / static_cast<double>(noisy.size()));
  const DenoiseResult den = shrink_denoise(noisy, w, bank, 3.0, t_n);
  CHECK(den.kept > 0);
  CHECK(den.kept < den.total);
  const AlmSet emp = empirical_alm(noisy, w, 2, bank.coverage_lmax());
  const AlmSet raw = needlet_synthesize(needlet_analyze(emp, bank, needlet_kind::mixed), bank);
  double err_den = 0.0, err_raw = 0.0;
  for (int l = 3; l <= den.alm.lmax(); ++l)
    for (int m = -l; m <= l; ++m) {
      const cd ref = l <= bump.lmax() ? bump.at(l, m) : cd(0.0, 0.0);
      err_den += std::norm(den.alm.at(l, m) - ref);
      err_raw += std::norm(raw.at(l, m) - ref);
    }
  CHECK(err_den < err_raw);
  CHECK_THROWS_AS((void)shrink_denoise(obs, w, bank, 0.0, 1.0), error);
  CHECK_THROWS_AS((void)shrink_denoise(obs, w, bank, 1.0, 0.0), error);
}
