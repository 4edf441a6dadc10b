#ifndef SPINLET_STOCHASTIC_HPP
#define SPINLET_STOCHASTIC_HPP

#include <complex>
#include <cstdint>
#include <vector>

#include "spinlet/needlet.hpp"

namespace spinlet {

// Angular power spectra of an isotropic (T, spin-s) pair: auto spectra for
// the scalar channel and the electric/magnetic parts, plus the two cross
// spectra (magnetic-scalar correlation beyond TM is excluded by parity).
// All vectors are indexed by degree l and share one length.
struct PowerSpectra {
  std::vector<double> c_t, c_e, c_m, c_te, c_tm;

  int lmax() const { return static_cast<int>(c_t.size()) - 1; }
  // Shape and admissibility: equal lengths, nonnegative auto spectra, and
  // pairwise Schur bounds c_te^2 <= c_t c_e, c_tm^2 <= c_t c_m (up to a tiny
  // relative slack for round-tripped values).  Reports the first offending l.
  void validate() const;
};

// Power-law family C_l = amplitude * l^-alpha on every auto channel for
// l >= lmin (flat below), with cross spectra given as fixed fractions of the
// Schur bound.  alpha > 2 keeps the field sample-continuous;
// te_fraction^2 + tm_fraction^2 <= 1 keeps the joint covariance admissible.
struct RegularSpectrumModel {
  double alpha = 2.5;
  double amplitude = 1.0;
  double te_fraction = 0.0;
  double tm_fraction = 0.0;
  int lmin = 1;

  PowerSpectra generate(int lmax) const;
};

struct SimulatedFields {
  AlmSet t;   // spin-0 coefficient table
  EMModes em; // electric/magnetic tables of the spin-s channel
};

// Draw one Gaussian isotropic realization of the joint (T, E, M) field up to
// lmax: per (l, m) the triple is complex Gaussian with covariance
// [[C_T, C_TE, C_TM], [C_TE, C_E, 0], [C_TM, 0, C_M]](l), m = 0 rows real,
// m < 0 filled by the involution.  Fully deterministic in (seed, replicate)
// per (l, m) substream, so extending lmax preserves the common prefix.
SimulatedFields simulate_fields(const PowerSpectra& spectra, int s, int lmax, std::uint64_t seed,
                                std::uint32_t replicate = 0);

enum class cross_mode { te, tm };   // which cross spectrum an estimator targets
enum class field_channel { t, e, m };

// Needlet cross estimator at one scale: sum over centers of
// Re(beta^T_{jk}) * Re(beta^S_{jk}) (te) or Re(beta^T_{jk}) * Im(beta^S_{jk})
// (tm), with beta^S mixed coefficients of the spin channel and beta^T the
// scalar companion coefficients.
double gamma_hat_level(const std::vector<std::complex<double>>& spin_beta,
                       const std::vector<std::complex<double>>& scalar_beta, cross_mode mode);

struct GammaEstimate {
  int j = 0;
  cross_mode mode = cross_mode::te;
  double value = 0.0;
  std::size_t n_centers = 0;
};

GammaEstimate gamma_hat(const NeedletCoeffs& spin_coeffs, const NeedletCoeffs& scalar_coeffs, int j,
                        cross_mode mode);

// Exact sampling moments of the estimator under the Gaussian model:
//   mean = sum_l b^2(sqrt(e_{ls})/B^j) (2l+1) C^{TA}_l
//   var  = sum_l b^4(sqrt(e_{ls})/B^j) (2l+1) (C^T_l C^A_l + (C^{TA}_l)^2)
// with A = E (te) or M (tm).
struct GammaMoments {
  double mean = 0.0;
  double var = 0.0;
};

GammaMoments gamma_moments(const PowerSpectra& spectra, const NeedletBank& bank, int j, cross_mode mode);

// Covariance of two coefficients of one channel at geodesic distance `dist`:
//   sqrt(lam1 lam2) sum_l b^2(sqrt(e_{ls})/B^j) C_l (2l+1)/(4 pi) P_l(cos dist),
// and the weight-free correlation profile cov(dist)/cov(0).
double beta_covariance(const PowerSpectra& spectra, const NeedletBank& bank, int j,
                       field_channel channel, double dist, double lam1, double lam2);
double beta_correlation(const PowerSpectra& spectra, const NeedletBank& bank, int j,
                        field_channel channel, double dist);

// Monte Carlo study of the standardized estimator (Gamma - mean)/sqrt(var):
// reports the standardized samples and their sample skewness and excess
// kurtosis, which the high-frequency normal limit drives to 0.
struct CltSummary {
  std::vector<double> samples;
  double skewness = 0.0;
  double ex_kurtosis = 0.0;
  double analytic_mean = 0.0;
  double analytic_var = 0.0;
};

CltSummary clt_experiment(const PowerSpectra& spectra, const NeedletBank& bank, int j, cross_mode mode,
                          int n_reps, std::uint64_t seed);

// One pointwise observation of a spin field.
struct Observation {
  double theta = 0.0;
  double phi = 0.0;
  std::complex<double> value;
};

// Empirical coefficient table from scattered observations:
//   a~_{lm} = sum_i w_i F_i conj(Y_{lm,spin}(x_i)).
// Empty weights default to the equal-mass rule w_i = 4 pi / n.
AlmSet empirical_alm(const std::vector<Observation>& obs, std::vector<double> weights, int spin,
                     int lmax);

// Empirical needlet coefficient sum_i w_i F_i conj(psi_{jk}(x_i)), computed
// through the empirical table (identical by exchanging the finite sums).
std::complex<double> empirical_beta(const std::vector<Observation>& obs, std::vector<double> weights,
                                    const NeedletBank& bank, needlet_kind kind, int j, std::size_t k);

// Hard-thresholded mixed-needlet reconstruction from noisy observations:
// empirical table -> mixed coefficients -> keep |beta| > c * t_n -> adjoint.
struct DenoiseResult {
  AlmSet alm;
  std::size_t kept = 0;
  std::size_t total = 0;
  double threshold = 0.0;
};

DenoiseResult shrink_denoise(const std::vector<Observation>& obs, std::vector<double> weights,
                             const NeedletBank& bank, double c, double t_n);

} // namespace spinlet

#endif
