#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pml/estimator.hpp"

/// Fourier synthesis of P_s(theta) from phase moments.
namespace pml::phasedist {

struct PhaseCurve {
  double s = 0.0;
  std::vector<double> theta;  // 2 pi k / grid_size
  std::vector<double> values;
  int truncation_L = 0;
  std::vector<double> pointwise_err;  // 1 sigma
};

struct ReconstructOptions {
  std::size_t grid_size = 512;
  bool lanczos = false;  // multiply term l by sinc(l / (L + 1))
};

/// P(theta) = (1/2pi) [1 + 2 sum_{l=1}^{L} Re(Psi_l e^{-i l theta})].
/// Needs l = 0..L, each exactly once, at one common s. Entry l = 0 is
/// ignored apart from the bookkeeping; normalization is structural.
PhaseCurve reconstruct(std::span<const estimator::MomentEstimate> moments,
                       const ReconstructOptions& opts = {});

struct ErrorStats {
  double max_abs = 0.0;
  double rms = 0.0;
};

ErrorStats curve_error_stats(const PhaseCurve& curve,
                             const std::function<double(double)>& exact);

/// `# key=value` comment lines, then `theta,p,perr`.
void write_curve_csv(const PhaseCurve& curve, std::ostream& out,
                     std::span<const std::string> comments = {});

}  // namespace pml::phasedist
