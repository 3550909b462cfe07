#include "pml/states.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <shared_mutex>
#include <stdexcept>
#include <utility>

#include "pml/kernels.hpp"
#include "pml/numfmt.hpp"

namespace pml::states {

namespace {

constexpr double kPi = std::numbers::pi;

void require_eta(double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) {
    throw std::domain_error("eta out of range (0, 1]: " + format_shortest(eta));
  }
}

bool is_gaussian(StateKind k) {
  return k == StateKind::coherent || k == StateKind::squeezed_vacuum;
}

// Principal variances of the squeezed-vacuum quasidistribution at ordering s,
// along the anti-squeezed axis (angle psi/2) and across it.
std::pair<double, double> squeezed_axes(double r, double s) {
  return {0.5 * (std::exp(2.0 * r) - s), 0.5 * (std::exp(-2.0 * r) - s)};
}

double fock_mixture_density(int n, double eta, double x) {
  if (eta == 1.0) return fock_density(n, x);
  // Loss turns |n> into a binomial mixture of |k>, k <= n.
  double density = 0.0;
  double binom = 1.0;
  for (int k = 0; k <= n; ++k) {
    if (k > 0) binom *= static_cast<double>(n - k + 1) / k;
    const double w = binom * std::pow(eta, k) * std::pow(1.0 - eta, n - k);
    density += w * fock_density(k, x);
  }
  return density;
}

// Cache of Fock-state quantile tables keyed by (n, eta).
class FockTableCache {
 public:
  std::shared_ptr<const QuantileTable> get(int n, double eta) {
    const auto key = std::make_pair(n, eta);
    {
      std::shared_lock lock(mutex_);
      if (auto it = tables_.find(key); it != tables_.end()) return it->second;
    }
    auto table = build(n, eta);
    std::unique_lock lock(mutex_);
    auto [it, inserted] = tables_.emplace(key, std::move(table));
    return it->second;
  }

 private:
  static std::shared_ptr<const QuantileTable> build(int n, double eta) {
    constexpr double grid_step = 0.01;
    constexpr double prob_step = 1e-4;
    const double half_width = std::sqrt(2.0 * n + 1.0) + 8.0;
    const auto cells = static_cast<std::size_t>(std::ceil(2.0 * half_width / grid_step));
    std::vector<double> xs(cells + 1);
    std::vector<double> cdf(cells + 1, 0.0);
    double prev = 0.0;
    for (std::size_t i = 0; i <= cells; ++i) {
      xs[i] = -half_width + grid_step * static_cast<double>(i);
      const double d = fock_mixture_density(n, eta, xs[i]);
      if (i > 0) cdf[i] = cdf[i - 1] + 0.5 * grid_step * (prev + d);
      prev = d;
    }
    const double total = cdf.back();
    for (double& c : cdf) c /= total;

    auto table = std::make_shared<QuantileTable>();
    table->step = prob_step;
    const auto n_q = static_cast<std::size_t>(std::lround(1.0 / prob_step));
    table->quantiles.resize(n_q + 1);
    std::size_t i = 1;
    for (std::size_t k = 0; k <= n_q; ++k) {
      const double p = static_cast<double>(k) * prob_step;
      while (i < cells && cdf[i] < p) ++i;
      const double lo = cdf[i - 1];
      const double hi = cdf[i];
      const double frac = hi > lo ? std::clamp((p - lo) / (hi - lo), 0.0, 1.0) : 1.0;
      table->quantiles[k] = xs[i - 1] + frac * (xs[i] - xs[i - 1]);
    }
    table->quantiles.front() = xs.front();
    table->quantiles.back() = xs.back();
    return table;
  }

  std::shared_mutex mutex_;
  std::map<std::pair<int, double>, std::shared_ptr<const QuantileTable>> tables_;
};

FockTableCache& fock_cache() {
  static FockTableCache cache;
  return cache;
}

}  // namespace

StateSpec StateSpec::squeezed_vacuum(double modulus, double phase) {
  if (!(modulus >= 0.0)) {
    throw std::domain_error("squeezing modulus |zeta| must be nonnegative");
  }
  StateSpec s;
  s.kind = StateKind::squeezed_vacuum;
  s.zeta_modulus = modulus;
  s.zeta_phase = std::fmod(phase, 2.0 * kPi);
  if (s.zeta_phase < 0.0) s.zeta_phase += 2.0 * kPi;
  return s;
}

StateSpec StateSpec::coherent(complex amplitude) {
  StateSpec s;
  s.kind = StateKind::coherent;
  s.xi = amplitude;
  return s;
}

StateSpec StateSpec::fock(int photons) {
  if (photons < 0) throw std::domain_error("Fock number must be nonnegative");
  StateSpec s;
  s.kind = StateKind::fock;
  s.n = photons;
  return s;
}

StateSpec StateSpec::displaced_fock(int photons, complex amplitude) {
  StateSpec s = fock(photons);
  s.kind = StateKind::displaced_fock;
  s.displacement = amplitude;
  return s;
}

std::string StateSpec::label() const {
  auto c = [](complex z) {
    return format_shortest(z.real()) + (z.imag() < 0 ? "" : "+") +
           format_shortest(z.imag()) + "i";
  };
  switch (kind) {
    case StateKind::squeezed_vacuum:
      return "squeezed_vacuum(zeta=" + format_shortest(zeta_modulus) +
             ",psi=" + format_shortest(zeta_phase) + ")";
    case StateKind::coherent:
      return "coherent(xi=" + c(xi) + ")";
    case StateKind::fock:
      return "fock(n=" + std::to_string(n) + ")";
    case StateKind::displaced_fock:
      return "displaced_fock(n=" + std::to_string(n) + ",alpha=" + c(displacement) + ")";
  }
  return "unknown";
}

GaussianMoments gaussian_moments(const StateSpec& state, double s) {
  if (state.kind != StateKind::squeezed_vacuum) {
    throw std::domain_error("gaussian_moments: squeezed vacuum only");
  }
  const double r = state.zeta_modulus;
  const double sh = std::sinh(r);
  return {sh * sh + 0.5 * (1.0 - s), 0.5 * std::sinh(2.0 * r), state.zeta_phase};
}

double quasidist_eval(const StateSpec& state, double q, double p, double s) {
  if (!is_gaussian(state.kind)) {
    throw std::domain_error("quasidist_eval: only coherent and squeezed vacuum states");
  }
  if (!(s <= 0.0)) {
    throw std::domain_error("quasidist_eval: ordering parameter must satisfy s <= 0");
  }
  if (state.kind == StateKind::coherent) {
    const double dq = q - std::numbers::sqrt2 * state.xi.real();
    const double dp = p - std::numbers::sqrt2 * state.xi.imag();
    const double w = 1.0 - s;
    return std::exp(-(dq * dq + dp * dp) / w) / (kPi * w);
  }
  const auto [major, minor] = squeezed_axes(state.zeta_modulus, s);
  const double axis = 0.5 * state.zeta_phase;
  const double a = q * std::cos(axis) + p * std::sin(axis);
  const double b = -q * std::sin(axis) + p * std::cos(axis);
  return std::exp(-0.5 * (a * a / major + b * b / minor)) /
         (2.0 * kPi * std::sqrt(major * minor));
}

double PhaseSpaceGrid::integral() const {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum * dq * dp;
}

PhaseSpaceGrid tabulate_quasidist(const StateSpec& state, double s, double q0,
                                  double p0, double step, std::size_t nq,
                                  std::size_t np) {
  if (!(step > 0.0) || nq == 0 || np == 0) {
    throw std::domain_error("tabulate_quasidist: empty or degenerate grid");
  }
  PhaseSpaceGrid g{q0, p0, step, step, nq, np, std::vector<double>(nq * np)};
  for (std::size_t i = 0; i < nq; ++i) {
    for (std::size_t j = 0; j < np; ++j) g.at(i, j) = quasidist_eval(state, g.q(i), g.p(j), s);
  }
  return g;
}

PhaseSpaceGrid smooth_quasidist(const PhaseSpaceGrid& grid, double s1, double s2) {
  if (!(s2 < s1)) {
    throw std::domain_error("smooth_quasidist: target ordering s2 must be below s1");
  }
  if (grid.nq == 0 || grid.np == 0 || grid.values.size() != grid.nq * grid.np ||
      !(grid.dq > 0.0) || !(grid.dp > 0.0)) {
    throw std::domain_error("smooth_quasidist: malformed grid");
  }
  const double c = s1 - s2;
  const double width = std::sqrt(0.5 * c);
  if (width < 2.0 * std::max(grid.dq, grid.dp)) {
    throw std::domain_error(
        "smooth_quasidist: grid too coarse (kernel width below two grid steps)");
  }

  // One-dimensional factor h * exp(-d^2/c) / sqrt(pi c).
  auto taps = [&](double h) {
    const auto reach = static_cast<std::ptrdiff_t>(std::ceil(12.0 * width / h));
    std::vector<double> w(static_cast<std::size_t>(2 * reach + 1));
    const double norm = h / std::sqrt(kPi * c);
    for (std::ptrdiff_t k = -reach; k <= reach; ++k) {
      const double d = static_cast<double>(k) * h;
      w[static_cast<std::size_t>(k + reach)] = norm * std::exp(-d * d / c);
    }
    return std::make_pair(reach, std::move(w));
  };

  const auto nq = static_cast<std::ptrdiff_t>(grid.nq);
  const auto np = static_cast<std::ptrdiff_t>(grid.np);
  PhaseSpaceGrid along_p = grid;
  {
    const auto [reach, w] = taps(grid.dp);
    for (std::ptrdiff_t i = 0; i < nq; ++i) {
      for (std::ptrdiff_t j = 0; j < np; ++j) {
        double acc = 0.0;
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, j - reach);
        const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(np - 1, j + reach);
        for (std::ptrdiff_t jj = lo; jj <= hi; ++jj) {
          acc += w[static_cast<std::size_t>(jj - j + reach)] *
                 grid.values[static_cast<std::size_t>(i * np + jj)];
        }
        along_p.values[static_cast<std::size_t>(i * np + j)] = acc;
      }
    }
  }
  PhaseSpaceGrid out = grid;
  {
    const auto [reach, w] = taps(grid.dq);
    for (std::ptrdiff_t i = 0; i < nq; ++i) {
      const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - reach);
      const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(nq - 1, i + reach);
      for (std::ptrdiff_t j = 0; j < np; ++j) {
        double acc = 0.0;
        for (std::ptrdiff_t ii = lo; ii <= hi; ++ii) {
          acc += w[static_cast<std::size_t>(ii - i + reach)] *
                 along_p.values[static_cast<std::size_t>(ii * np + j)];
        }
        out.values[static_cast<std::size_t>(i * np + j)] = acc;
      }
    }
  }
  return out;
}

double fock_density(int k, double x) {
  if (k < 0) throw std::domain_error("fock_density: k must be nonnegative");
  // Normalised Hermite functions by the stable three-term recurrence.
  double prev = 0.0;
  double cur = std::exp(-0.5 * x * x) / std::sqrt(std::sqrt(kPi));
  for (int j = 0; j < k; ++j) {
    const double next = std::sqrt(2.0 / (j + 1.0)) * x * cur -
                        std::sqrt(static_cast<double>(j) / (j + 1.0)) * prev;
    prev = cur;
    cur = next;
  }
  return cur * cur;
}

double quadrature_pdf(const StateSpec& state, double theta, double x, double eta) {
  require_eta(eta);
  if (is_gaussian(state.kind)) {
    const QuadratureLaw law = quadrature_law(state, theta, eta);
    const double z = (x - law.mean) / law.stddev;
    return std::exp(-0.5 * z * z) / (std::sqrt(2.0 * kPi) * law.stddev);
  }
  double shift = 0.0;
  if (state.kind == StateKind::displaced_fock) {
    shift = std::sqrt(2.0 * eta) * std::abs(state.displacement) *
            std::cos(theta - std::arg(state.displacement));
  }
  return fock_mixture_density(state.n, eta, x - shift);
}

double QuantileTable::sample(double u) const {
  const double pos = std::clamp(u, 0.0, 1.0) / step;
  const auto last = quantiles.size() - 1;
  auto k = static_cast<std::size_t>(pos);
  if (k >= last) k = last - 1;
  const double frac = pos - static_cast<double>(k);
  return quantiles[k] + frac * (quantiles[k + 1] - quantiles[k]);
}

QuadratureLaw quadrature_law(const StateSpec& state, double theta, double eta) {
  require_eta(eta);
  QuadratureLaw law;
  switch (state.kind) {
    case StateKind::squeezed_vacuum: {
      const double r = state.zeta_modulus;
      const double phi = theta - 0.5 * state.zeta_phase;
      const double c = std::cos(phi);
      const double s = std::sin(phi);
      const double var = 0.5 * eta * (std::exp(2.0 * r) * c * c + std::exp(-2.0 * r) * s * s) +
                         0.5 * (1.0 - eta);
      law.stddev = std::sqrt(var);
      return law;
    }
    case StateKind::coherent:
      law.mean = std::sqrt(2.0 * eta) * std::abs(state.xi) *
                 std::cos(theta - std::arg(state.xi));
      law.stddev = std::sqrt(0.5);
      return law;
    case StateKind::fock:
    case StateKind::displaced_fock:
      law.gaussian = false;
      law.table = fock_cache().get(state.n, eta);
      if (state.kind == StateKind::displaced_fock) {
        law.shift = std::sqrt(2.0 * eta) * std::abs(state.displacement) *
                    std::cos(theta - std::arg(state.displacement));
      }
      return law;
  }
  throw std::domain_error("quadrature_law: unknown state kind");
}

double exact_phase_distribution(const StateSpec& state, double s, double theta) {
  if (state.kind != StateKind::squeezed_vacuum) {
    throw std::domain_error("exact_phase_distribution: squeezed vacuum only");
  }
  const GaussianMoments g = gaussian_moments(state, s);
  if (!(s < 1.0) || !(g.B_s > g.C)) {
    throw std::domain_error(
        "exact_phase_distribution: B_s <= C, ordering s too large for this state");
  }
  return std::sqrt(g.B_s * g.B_s - g.C * g.C) /
         (2.0 * kPi * (g.B_s - g.C * std::cos(2.0 * theta - g.psi)));
}

complex exact_phase_moment(const StateSpec& state, int l, double s) {
  if (!(s < 1.0)) {
    throw std::domain_error("exact_phase_moment: ordering parameter must satisfy s < 1");
  }
  if (state.kind == StateKind::displaced_fock) {
    throw std::domain_error("exact_phase_moment: displaced Fock states are not supported");
  }
  if (l == 0) return {1.0, 0.0};
  switch (state.kind) {
    case StateKind::squeezed_vacuum: {
      if (l % 2 != 0) return {0.0, 0.0};
      const GaussianMoments g = gaussian_moments(state, s);
      if (!(g.B_s > g.C)) {
        throw std::domain_error("exact_phase_moment: B_s <= C for this ordering");
      }
      // B/C - sqrt(B^2/C^2 - 1), written without the 0/0 at C = 0.
      const double ratio = g.C / (g.B_s + std::sqrt(g.B_s * g.B_s - g.C * g.C));
      const int k = l / 2;
      const double mag = std::pow(ratio, std::abs(k));
      return std::polar(mag, k * g.psi);
    }
    case StateKind::coherent: {
      const double u = std::sqrt(2.0 / (1.0 - s)) * std::abs(state.xi);
      const double mag = kernels::filter_F(l, u);
      return std::polar(mag, l * std::arg(state.xi));
    }
    case StateKind::fock:
      return {0.0, 0.0};
    case StateKind::displaced_fock:
      break;
  }
  throw std::domain_error("exact_phase_moment: unsupported state kind");
}

Eigen::MatrixXcd coherent_density_matrix(complex xi, int cutoff) {
  if (cutoff <= 0) {
    throw std::domain_error("coherent_density_matrix: cutoff must be positive");
  }
  Eigen::VectorXcd amp(cutoff + 1);
  amp(0) = std::exp(-0.5 * std::norm(xi));
  for (int m = 1; m <= cutoff; ++m) amp(m) = amp(m - 1) * xi / std::sqrt(static_cast<double>(m));
  return amp * amp.adjoint();
}

}  // namespace pml::states
