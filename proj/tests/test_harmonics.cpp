#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "spinlet/harmonics.hpp"

using namespace spinlet;
using cd = std::complex<double>;

namespace {

constexpr double kPi = std::numbers::pi;

// Newman-Penrose raising/lowering operators applied by central differences;
// the independent analytic check that the harmonic tables really carry the
// spin structure the coefficient-space ladder claims.
cd eth_fd(int l, int m, int s, double th, double ph) {
  const double h = 1e-5;
  auto g = [&](double t, double p) { return std::pow(std::sin(t), -s) * eval_sph(l, m, s, t, p); };
  const cd dth = (g(th + h, ph) - g(th - h, ph)) / (2 * h);
  const cd dph = (g(th, ph + h) - g(th, ph - h)) / (2 * h);
  return -std::pow(std::sin(th), s) * (dth + cd(0, 1) / std::sin(th) * dph);
}

cd ethb_fd(int l, int m, int s, double th, double ph) {
  const double h = 1e-5;
  auto g = [&](double t, double p) { return std::pow(std::sin(t), s) * eval_sph(l, m, s, t, p); };
  const cd dth = (g(th + h, ph) - g(th - h, ph)) / (2 * h);
  const cd dph = (g(th, ph + h) - g(th, ph - h)) / (2 * h);
  return -std::pow(std::sin(th), -s) * (dth - cd(0, 1) / std::sin(th) * dph);
}

} // namespace

TEST_CASE("scalar harmonics match frozen reference values") {
  // Independently computed (associated-Legendre route) for m >= 0, where the
  // library convention coincides with Condon-Shortley.
  struct Case {
    int l, m;
    double th, ph;
    cd ref;
  };
  const Case cases[] = {
      {1, 0, 0.9, 0.4, {0.30372019192094096, 0.0}},
      {2, 1, 0.9, 0.4, {-0.3464775556546454, -0.14648836097575813}},
      {5, 3, 1.7, 2.1, {0.286919447083775, 0.004824917098022189}},
      {12, 7, 0.35, 5.2, {-0.006988887250915562, 0.025088217589594727}},
      {40, 25, 2.4, 1.1, {-0.4240733110487394, 0.41479149626686446}},
      {64, 64, 1.2, 0.7, {0.006429975393672518, 0.006859435033282805}},
      {64, 0, 2.9, 0.0, {-0.39492892849642275, 0.0}},
  };
  for (const auto& c : cases) {
    const cd v = eval_sph(c.l, c.m, 0, c.th, c.ph);
    CAPTURE(c.l);
    CAPTURE(c.m);
    CHECK(std::abs(v - c.ref) < 1e-13);
  }
}

TEST_CASE("spin harmonics match frozen reference values") {
  // Independently computed from the rotation-matrix definition with an
  // unrelated exact-arithmetic implementation.
  struct Case {
    int l, m, s;
    double th, ph;
    cd ref;
  };
  const Case cases[] = {
      {2, 1, 2, 0.9, 0.4, {-0.08610357789640229, -0.036404008843691965}},
      {3, -2, 1, 1.7, 2.1, {-0.1732495994726031, 0.3079996338841515}},
      {5, 4, -3, 0.35, 5.2, {-0.19510605753725116, 0.48898229877887545}},
      {8, 0, 2, 2.4, 1.1, {-0.3453153307848083, 0.0}},
      {16, -9, -2, 1.2, 0.7, {0.22202863903676706, -0.003733695250103536}},
      {24, 13, 3, 2.0, 3.3, {0.07023783128743023, -0.1321596798907655}},
  };
  for (const auto& c : cases) {
    const cd v = eval_sph(c.l, c.m, c.s, c.th, c.ph);
    CAPTURE(c.l);
    CAPTURE(c.m);
    CAPTURE(c.s);
    CHECK(std::abs(v - c.ref) < 1e-13);
  }
}

TEST_CASE("rotation matrix l=1 equals its closed form") {
  // The generator-level anchor for the whole recursion: rows m = -1, 0, 1.
  for (const double th : {0.1, 0.9, kPi / 2, 2.6, 3.0}) {
    const double c = std::cos(th), s = std::sin(th);
    const double ref[3][3] = {{(1 + c) / 2, -s / std::numbers::sqrt2, (1 - c) / 2},
                              {s / std::numbers::sqrt2, c, -s / std::numbers::sqrt2},
                              {(1 - c) / 2, s / std::numbers::sqrt2, (1 + c) / 2}};
    for (int m = -1; m <= 1; ++m)
      for (int n = -1; n <= 1; ++n)
        CHECK(wigner_d(1, m, n, th) == doctest::Approx(ref[m + 1][n + 1]).epsilon(1e-14));
  }
}

TEST_CASE("rotation matrices compose under angle addition") {
  // d(a) d(b) = d(a+b) is a functional equation no plausible indexing or
  // normalization bug survives.
  const int l = 12;
  const double a = 0.7, b = 1.1;
  for (int m = -l; m <= l; ++m) {
    for (int n = -l; n <= l; ++n) {
      double acc = 0.0;
      for (int k = -l; k <= l; ++k) acc += wigner_d(l, m, k, a) * wigner_d(l, k, n, b);
      CHECK(acc == doctest::Approx(wigner_d(l, m, n, a + b)).epsilon(5e-13));
    }
  }
}

TEST_CASE("rotation matrix rows stay unit norm at high degree") {
  const int l = 256;
  for (const int m : {0, 1, 37, 128, 255, 256}) {
    for (const double th : {0.05, 0.6, 1.3, kPi / 2, 2.2, 3.1}) {
      double sum = 0.0;
      for (int n = -l; n <= l; ++n) sum += wigner_d(l, m, n, th) * wigner_d(l, m, n, th);
      // error budget: O(l) rounding steps in the degree recursion
      CHECK(std::abs(sum - 1.0) < 1e-11);
    }
  }
}

TEST_CASE("rotation matrix symmetries") {
  const int l = 9;
  const double th = 1.3;
  for (int m = -l; m <= l; ++m) {
    for (int n = -l; n <= l; ++n) {
      const double v = wigner_d(l, m, n, th);
      const double sign = ((m - n) % 2 == 0) ? 1.0 : -1.0;
      CHECK(v == doctest::Approx(sign * wigner_d(l, n, m, th)).epsilon(1e-13));
      CHECK(v == doctest::Approx(wigner_d(l, -n, -m, th)).epsilon(1e-13));
    }
  }
}

TEST_CASE("column evaluator agrees with the single-element path") {
  const int lmax = 48;
  for (const int n : {0, -2, 3}) {
    const WignerColumns cols(n, lmax);
    for (const int m : {-lmax, -17, -1, 0, 2, 29, lmax}) {
      const int lmin = cols.lmin(m);
      std::vector<double> out(static_cast<std::size_t>(lmax - lmin + 1));
      for (const double th : {0.2, 1.6, 2.9}) {
        cols.column(m, th, out.data());
        for (int l = lmin; l <= lmax; ++l)
          CHECK(out[static_cast<std::size_t>(l - lmin)] ==
                doctest::Approx(wigner_d(l, m, n, th)).epsilon(5e-13));
      }
    }
  }
}

TEST_CASE("eigenvalues are exact integers with the two equivalent forms") {
  for (int s = -4; s <= 4; ++s) {
    std::int64_t prev = -1;
    for (int l = std::abs(s); l <= 256; ++l) {
      const std::int64_t e = eigenvalue_int(l, s);
      const std::int64_t ll = l, ss = std::abs(s);
      CHECK(e == ll * (ll + 1) - ss * (ss + 1)); // scalar-shift form
      CHECK(e >= 0);
      CHECK((e == 0) == (l == std::abs(s)));
      CHECK(e > prev); // strictly increasing in l
      prev = e;
      CHECK(eigenvalue(l, s).value == static_cast<double>(e));
    }
  }
  CHECK_THROWS_AS((void)eigenvalue_int(2, 3), error);
  CHECK_THROWS_AS((void)eigenvalue_int(-1, 0), error);
}

TEST_CASE("raising operator matches its finite-difference form") {
  const double th = 0.9, ph = 0.4;
  for (int l = 1; l <= 4; ++l)
    for (int m = -l; m <= l; ++m)
      for (int s = -l; s < l; ++s) {
        const cd lhs = eth_fd(l, m, s, th, ph);
        const cd rhs = std::sqrt(double((l - s) * (l + s + 1))) * eval_sph(l, m, s + 1, th, ph);
        CAPTURE(l);
        CAPTURE(m);
        CAPTURE(s);
        CHECK(std::abs(lhs - rhs) < 2e-6);
      }
  // one moderate-degree spot check
  const int l = 12, m = -5;
  for (int s = -2; s < 2; ++s) {
    const cd lhs = eth_fd(l, m, s, th, ph);
    const cd rhs = std::sqrt(double((l - s) * (l + s + 1))) * eval_sph(l, m, s + 1, th, ph);
    CHECK(std::abs(lhs - rhs) < 5e-5);
  }
}

TEST_CASE("lowering operator matches its finite-difference form") {
  const double th = 1.1, ph = 2.3;
  for (int l = 1; l <= 4; ++l)
    for (int m = -l; m <= l; ++m)
      for (int s = -l + 1; s <= l; ++s) {
        const cd lhs = ethb_fd(l, m, s, th, ph);
        const cd rhs = -std::sqrt(double((l + s) * (l - s + 1))) * eval_sph(l, m, s - 1, th, ph);
        CAPTURE(l);
        CAPTURE(m);
        CAPTURE(s);
        CHECK(std::abs(lhs - rhs) < 2e-6);
      }
}

TEST_CASE("per-degree magnitude sum is isotropic") {
  // sum_m |Y_{lm,s}|^2 = (2l+1)/4pi independently of the point and of s.
  for (const int l : {1, 2, 8, 33, 64}) {
    for (const int s : {0, 1, -1, 2, -2, 3}) {
      if (std::abs(s) > l) continue;
      for (const double th : {0.3, 1.4, 2.8}) {
        double sum = 0.0;
        for (int m = -l; m <= l; ++m) sum += std::norm(eval_sph(l, m, s, th, 0.77));
        const double ref = (2 * l + 1) / (4 * kPi);
        CHECK(std::abs(sum / ref - 1.0) < 1e-12);
      }
    }
  }
}

TEST_CASE("conjugation flips m and s with the spin parity sign") {
  for (const int l : {1, 3, 7, 20}) {
    for (int m = -l; m <= l; ++m) {
      for (const int s : {0, 1, -2, 3}) {
        if (std::abs(s) > l) continue;
        const cd lhs = std::conj(eval_sph(l, m, s, 1.2, 0.9));
        const cd rhs = (s % 2 == 0 ? 1.0 : -1.0) * eval_sph(l, -m, -s, 1.2, 0.9);
        CHECK(std::abs(lhs - rhs) < 1e-14);
      }
    }
  }
}

TEST_CASE("coefficient tables index, bound-check and accumulate energy") {
  AlmSet a(2, 5);
  CHECK(a.lmin() == 2);
  CHECK(a.size() == 36 - 4);
  // layout is contiguous with l outer, m inner
  std::size_t expect = 0;
  for (int l = 2; l <= 5; ++l)
    for (int m = -l; m <= l; ++m) CHECK(a.index(l, m) == expect++);
  CHECK(expect == a.size());
  CHECK_THROWS_AS((void)a.index(1, 0), error);
  CHECK_THROWS_AS((void)a.index(6, 0), error);
  CHECK_THROWS_AS((void)a.index(3, 4), error);
  CHECK_THROWS_AS(AlmSet(3, 2), error);

  a.at(2, -1) = cd(3.0, 4.0);
  a.at(5, 5) = cd(0.0, 2.0);
  CHECK(a.energy() == doctest::Approx(25.0 + 4.0).epsilon(1e-15));
}

TEST_CASE("coefficient ladder composes to the spin Laplacian") {
  AlmSet a(1, 6);
  for (int l = 1; l <= 6; ++l)
    for (int m = -l; m <= l; ++m) a.at(l, m) = cd(0.3 * l - 0.1 * m, 0.05 * m * l);

  const AlmSet up = spin_shift(a, shift_dir::raise);
  CHECK(up.spin() == 2);
  const AlmSet back = spin_shift(up, shift_dir::lower);
  const AlmSet lap = laplacian_apply(a);
  for (int l = 1; l <= 6; ++l)
    for (int m = -l; m <= l; ++m) {
      // lower(raise(x)) = -e_{ls} x
      CHECK(std::abs(back.at(l, m) + lap.at(l, m)) <= 1e-14 * std::abs(lap.at(l, m)) + 1e-300);
    }
  // the row that leaves the valid degree range is annihilated, not truncated:
  // raising spin 1 -> 2 maps the l=1 row through the exact factor (l-s) = 0.
  for (int m = -2; m <= 2; ++m) CHECK(up.at(2, m) != cd(0.0, 0.0));
  const AlmSet down = spin_shift(a, shift_dir::lower);
  CHECK(down.spin() == 0);
  for (int l = 1; l <= 6; ++l)
    for (int m = -l; m <= l; ++m)
      CHECK(std::abs(down.at(l, m) + std::sqrt(double((l + 1) * l)) * a.at(l, m)) < 1e-14);
}

TEST_CASE("harmonic evaluation rejects the poles and bad indices") {
  CHECK_THROWS_AS((void)eval_sph(2, 3, 0, 1.0, 0.0), error);
  CHECK_THROWS_AS((void)eval_sph(2, 0, 3, 1.0, 0.0), error);
  CHECK_THROWS_AS((void)eval_sph(2, 0, 0, 0.0, 0.0), error);
  CHECK_THROWS_AS((void)eval_sph(2, 0, 0, kPi, 0.0), error);
}
