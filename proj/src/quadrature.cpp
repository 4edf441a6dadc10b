#include "spinlet/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "spinlet/errors.hpp"

namespace spinlet {

GaussLegendre gauss_legendre(std::size_t n) {
  require(n >= 1, errc::invalid_parameter, "Gauss-Legendre rule needs n >= 1");
  GaussLegendre rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);

  // Find the roots of P_n in (-1,1). Roots are symmetric about 0; compute the
  // lower half (negative nodes) and mirror.
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    // Tricomi-style initial guess for the i-th root (counted from -1).
    double x = -std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                         (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      // Evaluate P_n(x) and P_{n-1}(x) by the three-term recurrence.
      double p0 = 1.0, p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double kk = static_cast<double>(k);
        const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
        p0 = p1;
        p1 = p2;
      }
      const double pn = (n == 1) ? x : p1;
      const double pnm1 = (n == 1) ? 1.0 : p0;
      dp = static_cast<double>(n) * (pnm1 - x * pn) / (1.0 - x * x);
      const double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) {
        // One more polished step, then stop.
        if (iter > 0) break;
      }
    }
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[n - 1 - i] = -x;
    rule.weights[n - 1 - i] = rule.weights[i];
  }
  if (n % 2 == 1) {
    // Middle node is exactly 0 for odd n.
    rule.nodes[n / 2] = 0.0;
  }
  return rule;
}

} // namespace spinlet
