#pragma once

#include <cstdint>
#include <stdexcept>

/// Special functions used by the filter and kernel evaluations.
///
/// Everything here is a pure function of its arguments and may be called
/// concurrently from any number of threads.
namespace pml::specfun {

/// Order ν of a modified Bessel function, restricted to ν ∈ {0, 1/2, 1, ...}.
/// Stored as 2ν so half-integer orders stay exact.
class HalfIntegerOrder {
 public:
  explicit HalfIntegerOrder(int twice_order) : twice_order_(twice_order) {
    if (twice_order < 0) {
      throw std::domain_error("HalfIntegerOrder: 2*nu must be nonnegative");
    }
  }

  static HalfIntegerOrder integer(int nu) { return HalfIntegerOrder(2 * nu); }

  int twice_order() const noexcept { return twice_order_; }
  double value() const noexcept { return 0.5 * twice_order_; }
  bool is_half_odd() const noexcept { return (twice_order_ & 1) != 0; }

 private:
  int twice_order_;
};

/// Error function. Rejects non-finite input.
double erf(double x);

/// Dawson integral D(x) = exp(-x^2) * int_0^x exp(y^2) dy, valid for all
/// finite x. Relative accuracy is close to machine precision.
double dawson(double x);

/// Imaginary error function erfi(x) = (2/sqrt(pi)) exp(x^2) D(x).
/// |x| above erfi_max_argument overflows double and is rejected.
double erfi(double x);
inline constexpr double erfi_max_argument = 26.0;

/// Modified Bessel function of the first kind I_nu(x), x >= 0.
double bessel_i(HalfIntegerOrder order, double x);

/// exp(-x) * I_nu(x); finite for every x >= 0.
double bessel_i_scaled(HalfIntegerOrder order, double x);

/// Gamma(k + 1/2) for k >= 0. Finite up to k = 171.
double gamma_half(int k);

}  // namespace pml::specfun
