#include "pml/kernels.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "pml/errors.hpp"
#include "pml/numfmt.hpp"
#include "pml/specfun.hpp"

namespace pml {

OrderingBoundError::OrderingBoundError(double s, double eta, double s_eta)
    : std::domain_error("ordering parameter s=" + format_shortest(s) +
                        " violates the loss bound s < " +
                        format_significant(s_eta, 12) +
                        " = -(1-eta)/eta for eta=" + format_shortest(eta)),
      s_(s),
      eta_(eta),
      s_eta_(s_eta) {}

ParseError::ParseError(std::size_t line, const std::string& what)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what
                                  : what),
      line_(line) {}

}  // namespace pml

namespace pml::kernels {

namespace {

constexpr double kTwoOverPi = 2.0 / std::numbers::pi;

// K_2 is tabulated at anchors u_k = k/8 on [0, 8] by adaptive Gauss-Kronrod
// quadrature of (2/pi) D(y); an evaluation adds a 10-point Gauss-Legendre
// integral over the remaining sub-interval. Past 8 the integral of the
// asymptotic expansion D(y) ~ sum_k (2k-1)!! / (2^(k+1) y^(2k+1)) takes over.
constexpr int kAnchorsPerUnit = 8;
constexpr double kAnchorEnd = 8.0;
constexpr int kAnchorCount = static_cast<int>(kAnchorEnd) * kAnchorsPerUnit + 1;
constexpr int kTailTerms = 20;

struct K2Table {
  std::array<double, kAnchorCount> anchor{};
  std::array<double, kTailTerms + 1> tail_coeff{};  // coefficient of u^(-2k)
  double tail_const = 0.0;
};

const K2Table& k2_table() {
  static const K2Table table = [] {
    K2Table t;
    auto dawson = [](double y) { return specfun::dawson(y); };
    const double h = 1.0 / kAnchorsPerUnit;
    t.anchor[0] = 0.0;
    for (int k = 1; k < kAnchorCount; ++k) {
      double err = 0.0;
      const double piece =
          boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
              dawson, (k - 1) * h, k * h, 10, 1e-15, &err);
      t.anchor[k] = t.anchor[k - 1] + kTwoOverPi * piece;
    }
    // int D dy = (1/2) ln y - sum_{k>=1} c_k / y^(2k) with
    // c_k = (2k-1)!! / (2^(k+1) * 2k).
    double dfact = 1.0;
    double tail_at_end = 0.0;
    for (int k = 1; k <= kTailTerms; ++k) {
      dfact *= (2.0 * k - 1.0);
      const double c = dfact / (std::ldexp(1.0, k + 1) * 2.0 * k);
      t.tail_coeff[k] = c;
      tail_at_end += c * std::pow(kAnchorEnd, -2.0 * k);
    }
    t.tail_const = t.anchor[kAnchorCount - 1] -
                   kTwoOverPi * (0.5 * std::log(kAnchorEnd) - tail_at_end);
    return t;
  }();
  return table;
}

double k2_positive(double u) {
  const K2Table& t = k2_table();
  if (u >= kAnchorEnd) {
    const double inv2 = 1.0 / (u * u);
    double corr = 0.0;
    for (int k = kTailTerms; k >= 1; --k) corr = (corr + t.tail_coeff[k]) * inv2;
    return t.tail_const + kTwoOverPi * (0.5 * std::log(u) - corr);
  }
  const int k = static_cast<int>(u * kAnchorsPerUnit + 0.5);
  const double uk = static_cast<double>(k) / kAnchorsPerUnit;
  if (u == uk) return t.anchor[k];
  auto dawson = [](double y) { return specfun::dawson(y); };
  const double rest =
      boost::math::quadrature::gauss<double, 10>::integrate(dawson, uk, u);
  return t.anchor[k] + kTwoOverPi * rest;
}

void require_nonzero_l(int l, const char* who) {
  if (l == 0) {
    throw std::domain_error(std::string(who) +
                            ": l = 0 has no kernel (Psi_0 = 1 identically)");
  }
}

}  // namespace

double loss_bound(double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) {
    throw std::domain_error("eta out of range (0, 1]: " + format_shortest(eta));
  }
  return -(1.0 - eta) / eta;
}

OrderingContext::OrderingContext(double s, double eta)
    : s_(s), eta_(eta), s_eta_(loss_bound(eta)) {
  if (!std::isfinite(s) || !(s < s_eta_ - boundary_margin)) {
    throw OrderingBoundError(s, eta, s_eta_);
  }
  s_eff_ = s - s_eta_;
  scale_ = std::sqrt(eta * std::abs(s_eff_));
}

double filter_F(int l, double u) {
  require_nonzero_l(l, "filter_F");
  if (!(u >= 0.0) || !std::isfinite(u)) {
    throw std::domain_error("filter_F: u must be finite and nonnegative");
  }
  if (u == 0.0) return 0.0;
  const int m = std::abs(l);
  const double x = 0.5 * u * u;
  const double lower = specfun::bessel_i_scaled(specfun::HalfIntegerOrder(m - 1), x);
  const double upper = specfun::bessel_i_scaled(specfun::HalfIntegerOrder(m + 1), x);
  return std::sqrt(std::numbers::pi) * 0.5 * u * (lower + upper);
}

double filter_F_series(int l, double u, double tol) {
  require_nonzero_l(l, "filter_F_series");
  if (!(u >= 0.0 && u <= 6.0)) {
    throw std::domain_error(
        "filter_F_series: u must lie in [0, 6] (alternating-series cancellation)");
  }
  if (!(tol >= 1e-14)) {
    throw std::domain_error("filter_F_series: tol must be at least 1e-14");
  }
  if (u == 0.0) return 0.0;
  const int m = std::abs(l);
  const double u2 = u * u;
  double term = 0.5 * m * std::tgamma(0.5 * m) / std::tgamma(m + 1.0) *
                std::pow(u, m);
  double sum = 0.0;
  for (int n = 0; n < 2000; ++n) {
    sum += term;
    const double next =
        -term * (n + 0.5 * m) / ((n + 1.0) * (n + m + 1.0)) * u2;
    if (std::abs(next) < tol * std::abs(sum)) break;
    term = next;
  }
  return sum;
}

double kernel_k2(double u) {
  if (!std::isfinite(u)) {
    throw std::domain_error("kernel_k2: argument must be finite");
  }
  return k2_positive(std::abs(u));
}

double kernel_base(int l, double u) {
  if (l < 1) {
    throw std::domain_error("kernel_base: l must be at least 1");
  }
  if (l % 2 == 1) return kernel_from_seeds(l, 0.25 * specfun::erf(u), 0.0);
  return kernel_from_seeds(l, 0.0, kernel_k2(u));
}

double kernel_series(int l, double u, double tol) {
  if (l < 1) {
    throw std::domain_error("kernel_series: l must be at least 1");
  }
  if (!(std::abs(u) <= 6.0)) {
    throw std::domain_error("kernel_series: |u| must not exceed 6");
  }
  if (!(tol >= 1e-14)) {
    throw std::domain_error("kernel_series: tol must be at least 1e-14");
  }
  if (l > 170) {
    throw std::domain_error("kernel_series: l too large for factorial range");
  }
  if (u == 0.0) return 0.0;
  const double w2 = 4.0 * u * u;
  double term = l / (4.0 * std::numbers::pi) * std::tgamma(0.5 * l) /
                std::tgamma(l + 1.0) * std::pow(2.0 * u, l);
  double sum = 0.0;
  for (int n = 0; n < 2000; ++n) {
    sum += term;
    const double next =
        -term * (n + 0.5 * l) / ((2.0 * n + l + 1.0) * (2.0 * n + l + 2.0)) * w2;
    if (std::abs(next) < tol * std::abs(sum)) break;
    term = next;
  }
  return sum;
}

complex sampling_kernel(int l, double x, double theta, const OrderingContext& ctx) {
  require_nonzero_l(l, "sampling_kernel");
  const double radial = kernel_base(std::abs(l), ctx.argument(x));
  return with_phase(l, radial, theta);
}

complex wigner_limit_kernel(int l, double x, double theta) {
  require_nonzero_l(l, "wigner_limit_kernel");
  const int m = std::abs(l);
  double radial = 0.0;
  if (m % 2 == 1) {
    const int k = (m - 1) / 2;
    const double sgn = (x > 0.0) - (x < 0.0);
    radial = 0.25 * m * (k % 2 == 0 ? 1.0 : -1.0) * sgn;
  } else {
    if (x == 0.0) {
      throw std::domain_error(
          "wigner_limit_kernel: even-l kernel is singular at x = 0");
    }
    const int k = m / 2;
    radial = k * (k % 2 == 1 ? 1.0 : -1.0) * std::log(std::abs(x)) /
             std::numbers::pi;
  }
  return with_phase(l, radial, theta);
}

}  // namespace pml::kernels
