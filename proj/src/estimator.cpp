#include "pml/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "pml/errors.hpp"
#include "pml/kernels.hpp"
#include "pml/parallel.hpp"
#include "pml/specfun.hpp"

namespace pml::estimator {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::size_t kChunk = 4096;

// Per-sample seeds K_1(u) and K_2(u); every kernel K_l is a multiple of one.
struct SeedTables {
  std::vector<double> k1;
  std::vector<double> k2;
};

SeedTables compute_seeds(const homodyne::HomodyneDataset& ds,
                         const kernels::OrderingContext& ctx, bool need_odd,
                         bool need_even, unsigned threads) {
  const std::size_t total = ds.samples.size();
  SeedTables t;
  if (need_odd) t.k1.resize(total);
  if (need_even) t.k2.resize(total);
  const std::size_t chunks = (total + kChunk - 1) / kChunk;
  parallel_for(chunks, threads, [&](std::size_t c) {
    const std::size_t end = std::min(total, (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) {
      const double u = ctx.argument(ds.samples[i]);
      if (need_odd) t.k1[i] = 0.25 * specfun::erf(u);
      if (need_even) t.k2[i] = kernels::kernel_k2(u);
    }
  });
  return t;
}

struct ComponentStats {
  double mean;
  double stderr;
};

ComponentStats mean_and_stderr(std::vector<double>& values, unsigned threads) {
  const auto n = static_cast<double>(values.size());
  const double mean = parallel_pairwise_sum(values, threads) / n;
  if (values.size() < 2) return {mean, 0.0};
  for (double& v : values) {
    const double d = v - mean;
    v = d * d;
  }
  const double var = parallel_pairwise_sum(values, threads) / (n - 1.0);
  return {mean, std::sqrt(var / n)};
}

// Estimate for l >= 1 from the seed tables.
MomentEstimate estimate_positive(const homodyne::HomodyneDataset& ds, const SeedTables& seeds,
                                 int l, double s, unsigned threads,
                                 std::vector<double>& re, std::vector<double>& im) {
  const std::size_t n = ds.plan.samples_per_phase;
  const std::size_t total = ds.samples.size();
  re.resize(total);
  im.resize(total);
  const bool odd = (l % 2) == 1;
  for (std::size_t j = 0; j < ds.plan.n_phases; ++j) {
    const double phase = l * ds.plan.theta(j);
    const double c = kTwoPi * std::cos(phase);
    const double sn = kTwoPi * std::sin(phase);
    for (std::size_t i = j * n; i < (j + 1) * n; ++i) {
      const double radial = odd ? kernels::kernel_from_seeds(l, seeds.k1[i], 0.0)
                                : kernels::kernel_from_seeds(l, 0.0, seeds.k2[i]);
      re[i] = radial * c;
      im[i] = radial * sn;
    }
  }
  const ComponentStats r = mean_and_stderr(re, threads);
  const ComponentStats m = mean_and_stderr(im, threads);
  return {l, s, {r.mean, m.mean}, r.stderr, m.stderr, total};
}

MomentEstimate unit_moment(const homodyne::HomodyneDataset& ds, double s) {
  return {0, s, {1.0, 0.0}, 0.0, 0.0, ds.samples.size()};
}

MomentEstimate conjugated(MomentEstimate e) {
  e.l = -e.l;
  e.value = std::conj(e.value);
  return e;
}

}  // namespace

double MomentEstimate::combined_stderr() const { return std::hypot(stderr_re, stderr_im); }

MomentEstimate estimate_moment(const homodyne::HomodyneDataset& ds, int l, double s,
                               const EstimatorOptions& opts) {
  if (l == 0) return unit_moment(ds, s);
  const kernels::OrderingContext ctx(s, ds.plan.eta);
  const unsigned threads = resolve_thread_count(opts.threads);
  const int m = std::abs(l);
  const SeedTables seeds = compute_seeds(ds, ctx, m % 2 == 1, m % 2 == 0, threads);
  std::vector<double> re;
  std::vector<double> im;
  const MomentEstimate e = estimate_positive(ds, seeds, m, s, threads, re, im);
  return l > 0 ? e : conjugated(e);
}

std::vector<MomentEstimate> estimate_spectrum(const homodyne::HomodyneDataset& ds,
                                              int l_max, double s,
                                              const EstimatorOptions& opts) {
  if (l_max < 1) throw std::domain_error("estimate_spectrum: l_max must be positive");
  const kernels::OrderingContext ctx(s, ds.plan.eta);
  const unsigned threads = resolve_thread_count(opts.threads);
  const SeedTables seeds = compute_seeds(ds, ctx, true, l_max >= 2, threads);
  std::vector<MomentEstimate> out;
  out.reserve(static_cast<std::size_t>(l_max) + 1);
  out.push_back(unit_moment(ds, s));
  std::vector<double> re;
  std::vector<double> im;
  for (int l = 1; l <= l_max; ++l) out.push_back(estimate_positive(ds, seeds, l, s, threads, re, im));
  return out;
}

std::vector<OrderingScanEntry> estimate_vs_s(const homodyne::HomodyneDataset& ds, int l,
                                             std::span<const double> s_values,
                                             const EstimatorOptions& opts) {
  std::vector<OrderingScanEntry> out;
  out.reserve(s_values.size());
  for (double s : s_values) {
    OrderingScanEntry entry;
    entry.s = s;
    try {
      entry.estimate = estimate_moment(ds, l, s, opts);
    } catch (const std::exception& e) {
      entry.error = e.what();
    }
    out.push_back(std::move(entry));
  }
  return out;
}

double cnl_coefficient(int n, int l, double s) {
  if (n < 0 || l < 1) throw std::domain_error("cnl_coefficient: need n >= 0 and l >= 1");
  if (!(s < 1.0)) throw std::domain_error("cnl_coefficient: need s < 1");
  if (n + l > 170) throw std::overflow_error("cnl_coefficient: n + l exceeds 170");

  const double half_l = 0.5 * l;
  const double log_prefactor = (n + half_l) * std::log(2.0 / (1.0 - s)) +
                               std::lgamma(n + half_l + 1.0) -
                               0.5 * (std::lgamma(n + 1.0) + std::lgamma(n + l + 1.0));
  // Terms relative to k = 0 by their exact ratio; the alternating sum for
  // s > -1 cancels heavily, so keep the extra long double digits.
  const long double base = -0.5L * (1.0L + s);
  long double term = 1.0L;
  long double sum = 1.0L;
  for (int k = 0; k < n && base != 0.0L; ++k) {
    term *= base * static_cast<long double>(n - k) * static_cast<long double>(n + l - k) /
            (static_cast<long double>(k + 1) * (n - k + half_l));
    sum += term;
  }
  const double value = std::exp(log_prefactor) * static_cast<double>(sum);
  if (!std::isfinite(value)) throw std::overflow_error("cnl_coefficient: result overflows");
  return value;
}

complex moments_from_density(const Eigen::MatrixXcd& rho, int l, double s) {
  if (rho.rows() != rho.cols() || rho.rows() == 0) {
    throw std::domain_error("moments_from_density: density matrix must be square");
  }
  const int cutoff = static_cast<int>(rho.rows()) - 1;
  if (l == 0) return rho.trace();
  const int m = std::abs(l);
  if (cutoff < m) {
    throw std::domain_error("moments_from_density: matrix cutoff below l");
  }
  complex psi{};
  for (int n = 0; n + m <= cutoff; ++n) psi += cnl_coefficient(n, m, s) * rho(n + m, n);
  return l > 0 ? psi : std::conj(psi);
}

complex extract_ordered_moment(const std::function<complex(double)>& psi_of_s, int n,
                               int l, double s0, const ExtractionOptions& opts) {
  if (n < 0 || l == 0) {
    throw std::domain_error("extract_ordered_moment: need n >= 0 and l != 0");
  }
  if (!(opts.t_ref > 0.0)) throw std::domain_error("extract_ordered_moment: t_ref must be positive");
  const int m = std::abs(l);
  constexpr int points = 10;
  const int columns = n + 3;  // powers m, m+2, ..., m + 2n + 4

  Eigen::MatrixXd design(points, columns);
  Eigen::VectorXd re(points);
  Eigen::VectorXd im(points);
  for (int i = 0; i < points; ++i) {
    const double tau = 0.05 * (i + 1);
    const double t = tau * opts.t_ref;
    const complex v = psi_of_s(s0 - 1.0 / (t * t));
    re(i) = v.real();
    im(i) = v.imag();
    for (int j = 0; j < columns; ++j) design(i, j) = std::pow(tau, m + 2 * j);
  }

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double condition = sv(0) / sv(sv.size() - 1);
  if (!(condition <= opts.max_condition)) {
    throw std::runtime_error("extract_ordered_moment: ill-conditioned fit (condition number " +
                             std::to_string(condition) +
                             "); use a smaller t_ref or a lower order n");
  }
  const Eigen::VectorXd fit_re = svd.solve(re);
  const Eigen::VectorXd fit_im = svd.solve(im);

  const int order = 2 * n + m;
  const double rescale = std::pow(opts.t_ref, -order);
  // f_{n,l} = (|l|/2) (-1)^n Gamma(n + |l|/2) / (n! (n + |l|)!)
  const double f_nl = 0.5 * m * (n % 2 == 0 ? 1.0 : -1.0) *
                      std::exp(std::lgamma(n + 0.5 * m) - std::lgamma(n + 1.0) -
                               std::lgamma(n + m + 1.0));
  return complex(fit_re(n), fit_im(n)) * (rescale / f_nl);
}

}  // namespace pml::estimator
