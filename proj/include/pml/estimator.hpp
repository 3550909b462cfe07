#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pml/homodyne.hpp"

/// Direct sampling of exponential phase moments Psi_l(s) from homodyne data,
/// plus the exact relations between Psi_l(s), density-matrix elements and
/// s-ordered moments.
namespace pml::estimator {

using complex = std::complex<double>;

struct MomentEstimate {
  int l = 0;
  double s = 0.0;
  complex value{1.0, 0.0};
  double stderr_re = 0.0;
  double stderr_im = 0.0;
  std::size_t n_samples = 0;

  /// sqrt(stderr_re^2 + stderr_im^2), the radius used for "within k sigma".
  double combined_stderr() const;
};

struct EstimatorOptions {
  unsigned threads = 0;  // 0: PML_THREADS or logical cores
};

/// Psi_l(s) = (2 pi / (M N)) sum_{j,k} K_l(x_jk, theta_j; s, eta).
/// l = 0 returns exactly 1. Otherwise throws OrderingBoundError unless
/// s < s_eta of the dataset.
MomentEstimate estimate_moment(const homodyne::HomodyneDataset& ds, int l, double s,
                               const EstimatorOptions& opts = {});

/// Estimates for l = 0..l_max; every entry equals estimate_moment(ds, l, s).
std::vector<MomentEstimate> estimate_spectrum(const homodyne::HomodyneDataset& ds,
                                              int l_max, double s,
                                              const EstimatorOptions& opts = {});

/// One row of estimate_vs_s: either an estimate or the reason there is none.
struct OrderingScanEntry {
  double s = 0.0;
  std::optional<MomentEstimate> estimate;
  std::string error;
};

std::vector<OrderingScanEntry> estimate_vs_s(const homodyne::HomodyneDataset& ds, int l,
                                             std::span<const double> s_values,
                                             const EstimatorOptions& opts = {});

/// c_{n,l}(s) in Psi_l(s) = sum_n c_{n,l}(s) rho_{n+l,n}; requires n + l <= 170.
double cnl_coefficient(int n, int l, double s);

/// Psi_l(s) from a Fock-basis density matrix, truncated at its dimension.
complex moments_from_density(const Eigen::MatrixXcd& rho, int l, double s);

/// Options for recovering s0-ordered moments from Psi_l(s) near s -> -inf.
struct ExtractionOptions {
  double t_ref = 0.5;
  double max_condition = 1e12;
};

/// <r^(2n+|l|) e^(i l theta)>_{s0}: the (2n+|l|)-th Taylor coefficient of
/// t -> Psi_l(s0 - 1/t^2) at t = 0, divided by f_{n,l}. The coefficient comes
/// from a least-squares fit of a parity-matched polynomial of degree
/// 2n+|l|+4 on t = (0.05, 0.10, ..., 0.50) * t_ref.
complex extract_ordered_moment(const std::function<complex(double)>& psi_of_s, int n,
                               int l, double s0, const ExtractionOptions& opts = {});

/// Moment records as JSON: {"pml_moments": 1, "command", "seed", "moments": [...]}.
void write_moments_json(std::span<const MomentEstimate> moments, std::ostream& out,
                        const std::string& command = {},
                        std::optional<std::uint64_t> seed = std::nullopt);

struct MomentsDocument {
  std::vector<MomentEstimate> moments;
  std::string command;
  std::optional<std::uint64_t> seed;
};

/// Throws ParseError on malformed JSON or a record missing a field.
MomentsDocument read_moments_json(std::istream& in);

}  // namespace pml::estimator
