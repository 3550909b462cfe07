#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <sstream>

#include "pml/estimator.hpp"
#include "pml/phasedist.hpp"

using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using namespace pml::phasedist;
using pml::estimator::MomentEstimate;
using pml::states::StateSpec;

namespace {

constexpr double kPi = std::numbers::pi;
const StateSpec kFigureState = StateSpec::squeezed_vacuum(1.317, 0.0);

std::vector<MomentEstimate> exact_moments(const StateSpec& st, int big_l, double s) {
  std::vector<MomentEstimate> out;
  for (int l = 0; l <= big_l; ++l) {
    MomentEstimate m;
    m.l = l;
    m.s = s;
    m.value = pml::states::exact_phase_moment(st, l, s);
    out.push_back(m);
  }
  return out;
}

double exact_curve(double theta) {
  return pml::states::exact_phase_distribution(kFigureState, -1.0, theta);
}

}  // namespace

TEST_CASE("uniform phase from vanishing moments", "[phasedist]") {
  std::vector<MomentEstimate> zeros(7);
  for (int l = 0; l < 7; ++l) {
    zeros[l].l = l;
    zeros[l].s = -1.0;
    zeros[l].value = l == 0 ? 1.0 : 0.0;
  }
  const auto curve = reconstruct(zeros, {64, false});
  REQUIRE(curve.values.size() == 64);
  for (double v : curve.values) CHECK(v == 1.0 / (2.0 * kPi));
  for (double e : curve.pointwise_err) CHECK(e == 0.0);
  CHECK(curve.truncation_L == 6);
  CHECK(curve.s == -1.0);
}

TEST_CASE("truncation error of the exact figure-state series", "[phasedist]") {
  const auto curve = reconstruct(exact_moments(kFigureState, 10, -1.0));
  const auto stats = curve_error_stats(curve, exact_curve);
  // Omitted harmonics 2k, k >= 6, all add up at theta = 0.
  const double rho = pml::states::exact_phase_moment(kFigureState, 2, -1.0).real();
  const double tail = std::pow(rho, 6) / (1.0 - rho) / kPi;
  CHECK_THAT(tail, WithinAbs(0.0279, 1e-4));
  CHECK_THAT(stats.max_abs, WithinAbs(tail, 1e-12));
  CHECK_THAT(curve.values[0], WithinAbs(exact_curve(0.0) - tail, 1e-12));
}

TEST_CASE("reconstruction converges monotonically in L", "[phasedist]") {
  double prev = INFINITY;
  for (int big_l : {4, 8, 12}) {
    const auto stats =
        curve_error_stats(reconstruct(exact_moments(kFigureState, big_l, -1.0)), exact_curve);
    CHECK(stats.rms <= prev);
    prev = stats.rms;
  }
}

TEST_CASE("reconstruction is normalised for any input", "[phasedist]") {
  std::vector<MomentEstimate> ms(9);
  for (int l = 0; l < 9; ++l) {
    ms[l].l = l;
    ms[l].s = -2.0;
    ms[l].value = std::polar(0.9 / (l + 1), 0.7 * l * l);
  }
  for (bool lanczos : {false, true}) {
    const auto curve = reconstruct(ms, {512, lanczos});
    double mean = 0.0;
    for (double v : curve.values) mean += v;
    mean /= static_cast<double>(curve.values.size());
    CHECK_THAT(mean * 2.0 * kPi, WithinAbs(1.0, 1e-12));
  }
}

TEST_CASE("grids of different size agree at shared nodes", "[phasedist]") {
  const auto ms = exact_moments(StateSpec::squeezed_vacuum(0.9, 1.3), 10, -1.5);
  const auto coarse = reconstruct(ms, {256, false});
  const auto fine = reconstruct(ms, {512, false});
  for (std::size_t k = 0; k < 256; ++k) {
    CHECK(coarse.theta[k] == fine.theta[2 * k]);
    CHECK_THAT(coarse.values[k], WithinAbs(fine.values[2 * k], 1e-14));
  }
}

TEST_CASE("pointwise error propagates the moment errors", "[phasedist]") {
  std::vector<MomentEstimate> ms(3);
  for (int l = 0; l < 3; ++l) {
    ms[l].l = l;
    ms[l].s = -1.0;
  }
  ms[2].stderr_re = 0.03;
  ms[2].stderr_im = 0.01;
  const auto curve = reconstruct(ms, {16, false});
  for (std::size_t k = 0; k < 16; ++k) {
    const double t = curve.theta[k];
    const double c = std::cos(2 * t);
    const double s = std::sin(2 * t);
    CHECK_THAT(curve.pointwise_err[k],
               WithinAbs(std::sqrt(0.03 * 0.03 * c * c + 0.01 * 0.01 * s * s) / kPi, 1e-15));
  }
}

TEST_CASE("Lanczos factors damp the truncation ripple", "[phasedist]") {
  const auto ms = exact_moments(kFigureState, 10, -1.0);
  const auto raw = reconstruct(ms, {512, false});
  const auto damped = reconstruct(ms, {512, true});
  // ripple: total variation over the half period where P decreases monotonically
  auto variation = [](const PhaseCurve& c) {
    double tv = 0.0;
    for (std::size_t k = 1; k <= 256; ++k) tv += std::abs(c.values[k] - c.values[k - 1]);
    return tv;
  };
  CHECK(variation(damped) < variation(raw));
}

TEST_CASE("sampled moments reproduce the truncated series", "[phasedist]") {
  pml::homodyne::MeasurementPlan plan;
  plan.eta = 0.8;
  plan.seed = 42;
  const auto ds = pml::homodyne::simulate(kFigureState, plan);
  const auto curve = reconstruct(pml::estimator::estimate_spectrum(ds, 10, -1.0));
  const auto truncated = reconstruct(exact_moments(kFigureState, 10, -1.0));
  std::size_t inside = 0;
  for (std::size_t k = 0; k < curve.values.size(); ++k) {
    inside += std::abs(curve.values[k] - truncated.values[k]) <= 3.0 * curve.pointwise_err[k];
  }
  CHECK(inside >= 487);
}

TEST_CASE("reconstruct validates its input", "[phasedist]") {
  auto ms = exact_moments(kFigureState, 4, -1.0);
  CHECK_THROWS_AS(reconstruct(ms, {0, false}), std::domain_error);
  CHECK_THROWS_AS(reconstruct(std::span(ms).first(1)), std::domain_error);

  auto missing = ms;
  missing.erase(missing.begin() + 2);
  missing.push_back(ms[1]);
  CHECK_THROWS_WITH(reconstruct(missing), ContainsSubstring("duplicate"));

  auto gap = ms;
  gap[3].l = 7;
  CHECK_THROWS_AS(reconstruct(gap), std::domain_error);

  auto mixed = ms;
  mixed[2].s = -2.0;
  CHECK_THROWS_WITH(reconstruct(mixed), ContainsSubstring("inconsistent s"));

  auto negative = ms;
  negative[1].l = -1;
  CHECK_THROWS_AS(reconstruct(negative), std::domain_error);
}

TEST_CASE("curve_error_stats", "[phasedist]") {
  const auto curve = reconstruct(exact_moments(kFigureState, 6, -1.0), {128, false});
  auto same = [&](double t) {
    const auto k = static_cast<std::size_t>(std::lround(t / (2.0 * kPi) * 128.0));
    return curve.values[k];
  };
  const auto zero = curve_error_stats(curve, same);
  CHECK(zero.max_abs == 0.0);
  CHECK(zero.rms == 0.0);
  const auto shifted = curve_error_stats(curve, [&](double t) { return same(t) + 0.125; });
  CHECK_THAT(shifted.max_abs, WithinAbs(0.125, 1e-15));
  CHECK_THAT(shifted.rms, WithinAbs(0.125, 1e-15));
}

TEST_CASE("curve CSV layout", "[phasedist]") {
  const auto curve = reconstruct(exact_moments(kFigureState, 2, -1.0), {4, false});
  std::ostringstream out;
  const std::vector<std::string> comments = {"command=pml reconstruct", "seed=42"};
  write_curve_csv(curve, out, comments);
  const std::string text = out.str();
  CHECK(text.starts_with("# command=pml reconstruct\n# seed=42\n# s=-1\n# L=2\ntheta,p,perr\n0,"));
  CHECK(std::count(text.begin(), text.end(), '\n') == 9);
}
