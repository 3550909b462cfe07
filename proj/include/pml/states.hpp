#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

/// Parametric single-mode states with closed-form phase-space and quadrature
/// statistics. These are the exact references every sampled quantity is
/// checked against.
///
/// Conventions: quadratures q = (a + a^dag)/sqrt(2), p = -i(a - a^dag)/sqrt(2),
/// so the vacuum has quadrature variance 1/2. Phase-space densities are
/// normalised over dq dp (polar form r dr dtheta).
namespace pml::states {

using complex = std::complex<double>;

enum class StateKind { squeezed_vacuum, coherent, fock, displaced_fock };

struct StateSpec {
  StateKind kind = StateKind::coherent;
  double zeta_modulus = 0.0;  // |zeta|
  double zeta_phase = 0.0;    // psi = arg zeta, in [0, 2 pi)
  complex xi{};               // coherent amplitude
  int n = 0;                  // Fock number
  complex displacement{};     // displaced Fock amplitude

  static StateSpec squeezed_vacuum(double modulus, double phase);
  static StateSpec coherent(complex amplitude);
  static StateSpec vacuum() { return coherent({0.0, 0.0}); }
  static StateSpec fock(int photons);
  static StateSpec displaced_fock(int photons, complex amplitude);

  /// Provenance string, e.g. "squeezed_vacuum(zeta=1.317,psi=0)".
  std::string label() const;
};

/// B_s, C and psi of a squeezed vacuum at ordering s.
struct GaussianMoments {
  double B_s;
  double C;
  double psi;
};

GaussianMoments gaussian_moments(const StateSpec& state, double s);

/// s-ordered quasidistribution W(q, p, s), s <= 0, for coherent and squeezed
/// vacuum states. Density with respect to dq dp.
double quasidist_eval(const StateSpec& state, double q, double p, double s);

/// Quasidistribution tabulated on a uniform rectangular grid; values are
/// stored row-major with p varying fastest.
struct PhaseSpaceGrid {
  double q0 = 0.0;
  double p0 = 0.0;
  double dq = 0.0;
  double dp = 0.0;
  std::size_t nq = 0;
  std::size_t np = 0;
  std::vector<double> values;

  double q(std::size_t i) const { return q0 + dq * static_cast<double>(i); }
  double p(std::size_t j) const { return p0 + dp * static_cast<double>(j); }
  double& at(std::size_t i, std::size_t j) { return values[i * np + j]; }
  double at(std::size_t i, std::size_t j) const { return values[i * np + j]; }
  /// Riemann sum over the grid (spectrally accurate for smooth densities).
  double integral() const;
};

PhaseSpaceGrid tabulate_quasidist(const StateSpec& state, double s, double q0,
                                  double p0, double step, std::size_t nq,
                                  std::size_t np);

/// Gaussian smoothing from ordering s1 to s2 < s1 by direct (separable)
/// convolution with exp(-|d|^2/(s1-s2)) / (pi (s1-s2)).
PhaseSpaceGrid smooth_quasidist(const PhaseSpaceGrid& grid, double s1, double s2);

/// Probability density of the rotated quadrature x_theta recorded with
/// detection efficiency eta in (0, 1].
double quadrature_pdf(const StateSpec& state, double theta, double x, double eta);

/// Inverse CDF of a phase-independent tabulated quadrature law, at uniform
/// resolution in cumulative probability.
struct QuantileTable {
  double step = 0.0;            // spacing in probability
  std::vector<double> quantiles;  // quantiles[k] = F^{-1}(k * step)
  double sample(double u) const;  // linear interpolation, u in [0, 1]
};

/// How x_theta is distributed at a given phase: either exactly Gaussian or
/// a tabulated law translated by `shift`.
struct QuadratureLaw {
  bool gaussian = true;
  double mean = 0.0;
  double stddev = 0.0;
  std::shared_ptr<const QuantileTable> table;
  double shift = 0.0;
};

QuadratureLaw quadrature_law(const StateSpec& state, double theta, double eta);

/// Closed-form P_s(theta) of a squeezed vacuum.
double exact_phase_distribution(const StateSpec& state, double s, double theta);

/// Exact exponential phase moment Psi_l(s) for squeezed vacuum, coherent and
/// Fock states.
complex exact_phase_moment(const StateSpec& state, int l, double s);

/// Fock-basis density matrix of |xi>, indices 0..cutoff.
Eigen::MatrixXcd coherent_density_matrix(complex xi, int cutoff);

/// Hermite-function density |psi_k(x)|^2 of the Fock state |k>.
double fock_density(int k, double x);

}  // namespace pml::states
