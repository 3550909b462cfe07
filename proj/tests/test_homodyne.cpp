#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "pml/errors.hpp"
#include "pml/homodyne.hpp"

using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using namespace pml::homodyne;
using pml::states::StateSpec;

namespace {

struct Moments {
  double mean;
  double var;
};

Moments moments_of(std::span<const double> xs) {
  double m = 0.0;
  for (double x : xs) m += x;
  m /= static_cast<double>(xs.size());
  double v = 0.0;
  for (double x : xs) v += (x - m) * (x - m);
  return {m, v / static_cast<double>(xs.size() - 1)};
}

MeasurementPlan make_plan(std::size_t m, std::size_t n, double eta, std::uint64_t seed) {
  MeasurementPlan p;
  p.n_phases = m;
  p.samples_per_phase = n;
  p.eta = eta;
  p.seed = seed;
  return p;
}

// Two-sample Kolmogorov-Smirnov statistic of sorted samples.
double ks_statistic(const std::vector<double>& a, const std::vector<double>& b) {
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  return d;
}

std::string replace_line(const std::string& text, const std::string& from, const std::string& to) {
  std::string out = text;
  const auto pos = out.find(from);
  REQUIRE(pos != std::string::npos);
  out.replace(pos, from.size(), to);
  return out;
}

}  // namespace

TEST_CASE("MeasurementPlan grid and validation", "[homodyne]") {
  const auto plan = make_plan(120, 10, 1.0, 0);
  const auto grid = plan.theta_grid();
  REQUIRE(grid.size() == 120);
  CHECK(grid[0] == 0.0);
  CHECK_THAT(grid[30], WithinAbs(std::numbers::pi / 2.0, 1e-15));
  CHECK(grid.back() < 2.0 * std::numbers::pi);
  CHECK_THROWS_AS(make_plan(0, 10, 1.0, 0).validate(), std::domain_error);
  CHECK_THROWS_AS(make_plan(10, 0, 1.0, 0).validate(), std::domain_error);
  CHECK_THROWS_AS(make_plan(10, 10, 0.0, 0).validate(), std::domain_error);
  CHECK_THROWS_AS(make_plan(10, 10, 1.01, 0).validate(), std::domain_error);
}

TEST_CASE("CounterRng streams are reproducible and distinct", "[homodyne]") {
  auto a = CounterRng::for_phase(42, 3);
  auto b = CounterRng::for_phase(42, 3);
  auto c = CounterRng::for_phase(42, 4);
  auto d = CounterRng::for_phase(43, 3);
  int same_c = 0;
  int same_d = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    same_c += x == c.next_u64();
    same_d += x == d.next_u64();
  }
  CHECK(same_c == 0);
  CHECK(same_d == 0);
  auto u = CounterRng(9);
  double lo = 1.0;
  double hi = 0.0;
  double sum = 0.0;
  for (int i = 0; i < 200000; ++i) {
    const double v = u.next_open01();
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    sum += v;
  }
  CHECK(lo > 0.0);
  CHECK(hi < 1.0);
  CHECK_THAT(sum / 200000.0, WithinAbs(0.5, 4.0 * std::sqrt(1.0 / 12.0 / 200000.0)));
}

TEST_CASE("vacuum samples have variance one half", "[homodyne]") {
  const std::size_t n = 100000;
  const auto ds = simulate(StateSpec::vacuum(), make_plan(4, n, 1.0, 7));
  REQUIRE(ds.samples.size() == 4 * n);
  for (std::size_t j = 0; j < 4; ++j) {
    const auto m = moments_of(ds.phase_samples(j));
    CHECK_THAT(m.var, WithinAbs(0.5, 4.0 * std::sqrt(2.0 / n) * 0.5));
    CHECK_THAT(m.mean, WithinAbs(0.0, 4.0 * std::sqrt(0.5 / n)));
  }
}

TEST_CASE("squeezed and coherent samples follow their quadrature laws", "[homodyne]") {
  const std::size_t n = 100000;
  {
    const auto ds =
        simulate(StateSpec::squeezed_vacuum(1.317, 0.0), make_plan(4, n, 0.8, 11));
    const double expected = 5.671750448;
    const auto m = moments_of(ds.phase_samples(0));
    CHECK_THAT(m.var, WithinAbs(expected, 4.0 * std::sqrt(2.0 / n) * expected));
  }
  {
    const auto ds = simulate(StateSpec::coherent({1.0, 0.0}), make_plan(4, n, 1.0, 12));
    const auto m = moments_of(ds.phase_samples(0));
    CHECK_THAT(m.mean, WithinAbs(std::sqrt(2.0), 4.0 / std::sqrt(2.0 * n)));
    // theta = pi/2 bin sees the orthogonal quadrature
    CHECK_THAT(moments_of(ds.phase_samples(1)).mean, WithinAbs(0.0, 4.0 / std::sqrt(2.0 * n)));
  }
}

TEST_CASE("lossy Gaussian variance in every phase bin", "[homodyne]") {
  const auto st = StateSpec::squeezed_vacuum(0.6, 0.5);
  const auto plan = make_plan(24, 5000, 0.7, 5);
  const auto ds = simulate(st, plan);
  for (std::size_t j = 0; j < plan.n_phases; ++j) {
    const double th = plan.theta(j) - 0.25;
    const double sigma2 = 0.5 * (std::exp(1.2) * std::cos(th) * std::cos(th) +
                                 std::exp(-1.2) * std::sin(th) * std::sin(th));
    const double expected = 0.7 * sigma2 + 0.15;
    const auto m = moments_of(ds.phase_samples(j));
    INFO("phase " << j);
    CHECK_THAT(m.var, WithinAbs(expected, 5.0 * expected * std::sqrt(2.0 / 4999.0)));
  }
}

TEST_CASE("Fock samples are phase independent", "[homodyne]") {
  const auto plan = make_plan(120, 5000, 0.9, 21);
  const auto ds = simulate(StateSpec::fock(3), plan);
  std::vector<double> pooled = ds.samples;
  std::sort(pooled.begin(), pooled.end());
  const double n = 5000.0;
  const double m = static_cast<double>(pooled.size());
  const double critical = 1.628 * std::sqrt((n + m) / (n * m));
  int below = 0;
  for (std::size_t j = 0; j < plan.n_phases; ++j) {
    auto bin = std::vector<double>(ds.phase_samples(j).begin(), ds.phase_samples(j).end());
    std::sort(bin.begin(), bin.end());
    below += ks_statistic(bin, pooled) < critical;
  }
  CHECK(below >= 114);  // 95% of 120
  // second moment of the lossy Fock law: eta n + 1/2
  const auto mom = moments_of(ds.samples);
  CHECK_THAT(mom.var, WithinAbs(0.9 * 3 + 0.5, 0.05));
}

TEST_CASE("simulation is independent of the thread count", "[homodyne]") {
  const StateSpec cases[] = {StateSpec::squeezed_vacuum(1.317, 0.0),
                             StateSpec::displaced_fock(2, std::polar(1.0, 0.5))};
  for (const auto& st : cases) {
    const auto plan = make_plan(30, 999, 0.8, 99);
    const auto one = simulate(st, plan, 1);
    const auto three = simulate(st, plan, 3);
    const auto eight = simulate(st, plan, 8);
    CHECK(one.samples == three.samples);
    CHECK(one.samples == eight.samples);
    CHECK(one.state_label == st.label());
  }
  const auto a = simulate(StateSpec::vacuum(), make_plan(3, 10, 1.0, 1));
  const auto b = simulate(StateSpec::vacuum(), make_plan(3, 10, 1.0, 2));
  CHECK(a.samples != b.samples);
}

TEST_CASE("dataset round trip is bit exact", "[homodyne]") {
  const auto ds = simulate(StateSpec::squeezed_vacuum(1.317, 0.0), make_plan(120, 50, 0.8, 42));
  std::stringstream buf;
  const std::vector<std::string> extra = {"command=pml simulate"};
  write_dataset(ds, buf, extra);
  const std::string text = buf.str();
  CHECK(text.starts_with("# pml-dataset v1\n# state=squeezed_vacuum(zeta=1.317,psi=0)\n"
                         "# eta=0.8\n# phases=120\n# samples_per_phase=50\n# seed=42\n"
                         "# command=pml simulate\nphase_index,theta,x\n"));
  std::istringstream in(text);
  const auto back = read_dataset(in);
  CHECK(back.plan.n_phases == 120);
  CHECK(back.plan.samples_per_phase == 50);
  CHECK(back.plan.eta == 0.8);
  CHECK(back.plan.seed == 42);
  CHECK(back.state_label == ds.state_label);
  CHECK(back.samples == ds.samples);
}

TEST_CASE("dataset reader rejects malformed files", "[homodyne]") {
  const auto ds = simulate(StateSpec::vacuum(), make_plan(4, 3, 1.0, 1));
  std::stringstream buf;
  write_dataset(ds, buf);
  const std::string good = buf.str();

  auto parse_error = [](const std::string& text) -> std::string {
    std::istringstream in(text);
    try {
      (void)read_dataset(in);
    } catch (const pml::ParseError& e) {
      return e.what();
    }
    return "";
  };

  CHECK_THAT(parse_error(replace_line(good, "# eta=1", "# eta=1.2")),
             ContainsSubstring("line 3: eta out of range"));
  CHECK_THAT(parse_error(replace_line(good, "# samples_per_phase=3", "# samples_per_phase=4")),
             ContainsSubstring("dimension mismatch"));
  // a different M moves every theta after the first block
  CHECK_THAT(parse_error(replace_line(good, "# phases=4", "# phases=5")),
             ContainsSubstring("line 11: theta does not match"));
  // drop the last phase block: 3 blocks declared as 4
  {
    std::string short_file = good;
    for (int i = 0; i < 3; ++i) short_file.erase(short_file.rfind('\n', short_file.size() - 2) + 1);
    CHECK_THAT(parse_error(short_file), ContainsSubstring("dimension mismatch"));
  }
  CHECK_THAT(parse_error(replace_line(good, "# pml-dataset v1", "# other v1")),
             ContainsSubstring("line 1"));
  CHECK_THAT(parse_error(replace_line(good, "# seed=1\n", "")),
             ContainsSubstring("missing header field 'seed'"));
  {
    const auto pos = good.find("\n0,0,") + 5;
    const auto end = good.find('\n', pos);
    std::string bad = good;
    bad.replace(pos, end - pos, "nan");
    CHECK_THAT(parse_error(bad), ContainsSubstring("line 8: non-finite"));
    bad = good;
    bad.replace(pos, end - pos, "inf");
    CHECK_THAT(parse_error(bad), ContainsSubstring("non-finite"));
  }
  CHECK_THAT(parse_error(replace_line(good, "\n1,1.5707963267948966,", "\n1,1.6,")),
             ContainsSubstring("theta does not match"));
  CHECK_THAT(parse_error(replace_line(good, "\n1,", "\n2,")),
             ContainsSubstring("dimension mismatch"));
  CHECK_THAT(parse_error(replace_line(good, "\n1,", "\n1,2,")),
             ContainsSubstring("three comma-separated"));
}
