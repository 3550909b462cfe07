#pragma once

#include <cmath>
#include <complex>

/// Filtering functions F_l(u) and the homodyne sampling kernels for
/// exponential phase moments, in closed form and as truncated power series.
namespace pml::kernels {

using complex = std::complex<double>;

/// Ordering parameter s together with the detection efficiency eta.
///
/// Losses smooth the recorded quadratures to ordering s_eta = -(1-eta)/eta,
/// so only s < s_eta is reachable. The compensated kernel is evaluated at
/// u = x / scale with scale = sqrt(eta * |s + (1-eta)/eta|).
class OrderingContext {
 public:
  /// Throws OrderingBoundError unless s < s_eta - boundary_margin.
  OrderingContext(double s, double eta);

  static constexpr double boundary_margin = 1e-9;

  double s() const noexcept { return s_; }
  double eta() const noexcept { return eta_; }
  double s_eta() const noexcept { return s_eta_; }
  double s_eff() const noexcept { return s_eff_; }
  double scale() const noexcept { return scale_; }
  double argument(double x) const noexcept { return x / scale_; }

 private:
  double s_;
  double eta_;
  double s_eta_;
  double s_eff_;
  double scale_;
};

/// s_eta = -(1 - eta)/eta; rejects eta outside (0, 1].
double loss_bound(double eta);

/// F_l(u), l != 0, u >= 0. Increases from 0 towards 1.
double filter_F(int l, double u);

/// Taylor series of F_l truncated once a term drops below tol * |sum|.
/// Only 0 <= u <= 6 is accepted.
double filter_F_series(int l, double u, double tol);

/// K_2(u) = (1/sqrt(pi)) int_0^u exp(-y^2) erfi(y) dy = (2/pi) int_0^u D(y) dy.
double kernel_k2(double u);

/// Radial kernel K_l(u), l >= 1, normalised so that K_{l+2} = -(l+2)/l K_l:
/// odd l: (-1)^((l-1)/2) l erf(u)/4, even l: (-1)^(l/2-1) (l/2) K_2(u).
double kernel_base(int l, double u);

/// kernel_base(l, u) given the two seeds K_1(u) = erf(u)/4 and K_2(u).
inline double kernel_from_seeds(int l, double k1, double k2) {
  if (l % 2 == 1) {
    const int k = (l - 1) / 2;
    return (k % 2 == 0 ? 1.0 : -1.0) * l * k1;
  }
  const int k = l / 2;
  return (k % 2 == 1 ? 1.0 : -1.0) * k * k2;
}

/// Power series (l / 4 pi) sum_n (-1)^n Gamma(n + l/2)/(2n+l)! (2u)^(2n+l).
/// Differs from kernel_base by a polynomial of degree < l for l >= 3.
double kernel_series(int l, double u, double tol);

/// Loss-compensated sampling kernel K_l(x, theta; s, eta), l != 0.
complex sampling_kernel(int l, double x, double theta, const OrderingContext& ctx);

/// radial * exp(i l theta); a negative l yields the conjugate kernel.
inline complex with_phase(int l, double radial, double theta) {
  const double phase = static_cast<double>(l) * theta;
  return {radial * std::cos(phase), radial * std::sin(phase)};
}

/// Limit of the kernels for large |x|, i.e. the Wigner-function kernels.
complex wigner_limit_kernel(int l, double x, double theta);

}  // namespace pml::kernels
