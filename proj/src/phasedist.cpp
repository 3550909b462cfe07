#include "pml/phasedist.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "pml/numfmt.hpp"

namespace pml::phasedist {

namespace {

constexpr double kPi = std::numbers::pi;

double lanczos_sigma(int l, int big_l) {
  const double x = kPi * l / (big_l + 1.0);
  return std::sin(x) / x;
}

}  // namespace

PhaseCurve reconstruct(std::span<const estimator::MomentEstimate> moments,
                       const ReconstructOptions& opts) {
  if (opts.grid_size == 0) throw std::domain_error("reconstruct: grid_size must be positive");
  if (moments.size() < 2) throw std::domain_error("reconstruct: need moments l = 0..L with L >= 1");

  const int big_l = static_cast<int>(moments.size()) - 1;
  std::vector<const estimator::MomentEstimate*> by_l(moments.size(), nullptr);
  const double s = moments.front().s;
  for (const auto& m : moments) {
    if (m.l < 0 || m.l > big_l) {
      throw std::domain_error("reconstruct: moment order l=" + std::to_string(m.l) +
                              " outside 0.." + std::to_string(big_l));
    }
    if (by_l[m.l] != nullptr) {
      throw std::domain_error("reconstruct: duplicate moment l=" + std::to_string(m.l));
    }
    if (m.s != s) throw std::domain_error("reconstruct: moments carry inconsistent s");
    by_l[m.l] = &m;
  }
  for (int l = 0; l <= big_l; ++l) {
    if (by_l[l] == nullptr) throw std::domain_error("reconstruct: missing l=" + std::to_string(l));
  }

  PhaseCurve curve;
  curve.s = s;
  curve.truncation_L = big_l;
  const std::size_t n = opts.grid_size;
  curve.theta.resize(n);
  curve.values.resize(n);
  curve.pointwise_err.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double theta = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(n);
    double sum = 0.0;
    double var = 0.0;
    for (int l = 1; l <= big_l; ++l) {
      const auto& m = *by_l[l];
      const double w = opts.lanczos ? lanczos_sigma(l, big_l) : 1.0;
      const double c = std::cos(l * theta);
      const double sn = std::sin(l * theta);
      // Re(Psi e^{-i l theta})
      sum += w * (m.value.real() * c + m.value.imag() * sn);
      var += w * w * (m.stderr_re * m.stderr_re * c * c + m.stderr_im * m.stderr_im * sn * sn);
    }
    curve.theta[k] = theta;
    curve.values[k] = (1.0 + 2.0 * sum) / (2.0 * kPi);
    curve.pointwise_err[k] = std::sqrt(var) / kPi;
  }
  return curve;
}

ErrorStats curve_error_stats(const PhaseCurve& curve,
                             const std::function<double(double)>& exact) {
  ErrorStats st;
  if (curve.values.empty()) return st;
  double sq = 0.0;
  for (std::size_t k = 0; k < curve.values.size(); ++k) {
    const double d = std::abs(curve.values[k] - exact(curve.theta[k]));
    st.max_abs = std::max(st.max_abs, d);
    sq += d * d;
  }
  st.rms = std::sqrt(sq / static_cast<double>(curve.values.size()));
  return st;
}

void write_curve_csv(const PhaseCurve& curve, std::ostream& out,
                     std::span<const std::string> comments) {
  for (const std::string& c : comments) out << "# " << c << '\n';
  out << "# s=" << format_shortest(curve.s) << '\n'
      << "# L=" << curve.truncation_L << '\n'
      << "theta,p,perr\n";
  for (std::size_t k = 0; k < curve.values.size(); ++k) {
    out << format_shortest(curve.theta[k]) << ',' << format_shortest(curve.values[k]) << ','
        << format_shortest(curve.pointwise_err[k]) << '\n';
  }
  if (!out) throw std::runtime_error("write_curve_csv: stream error");
}

}  // namespace pml::phasedist
