#include "pml/homodyne.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <stdexcept>

#include "pml/errors.hpp"
#include "pml/numfmt.hpp"
#include "pml/parallel.hpp"

namespace pml::homodyne {

namespace {

constexpr std::string_view kMagic = "# pml-dataset v1";
constexpr std::string_view kColumns = "phase_index,theta,x";

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) {
    s.remove_suffix(1);
  }
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

}  // namespace

double MeasurementPlan::theta(std::size_t j) const {
  return 2.0 * std::numbers::pi * static_cast<double>(j) /
         static_cast<double>(n_phases);
}

std::vector<double> MeasurementPlan::theta_grid() const {
  std::vector<double> grid(n_phases);
  for (std::size_t j = 0; j < n_phases; ++j) grid[j] = theta(j);
  return grid;
}

void MeasurementPlan::validate() const {
  if (n_phases == 0) throw std::domain_error("measurement plan needs at least one phase");
  if (samples_per_phase == 0) {
    throw std::domain_error("measurement plan needs at least one sample per phase");
  }
  if (!(eta > 0.0 && eta <= 1.0)) {
    throw std::domain_error("eta out of range (0, 1]: " + format_shortest(eta));
  }
}

CounterRng CounterRng::for_phase(std::uint64_t seed, std::size_t phase_index) {
  return CounterRng(mix64(seed ^ mix64(0x632BE59BD9B4E019ULL + phase_index)));
}

std::uint64_t CounterRng::next_u64() {
  ++counter_;
  return mix64(key_ + counter_ * 0x9E3779B97F4A7C15ULL);
}

double CounterRng::next_open01() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

HomodyneDataset simulate(const states::StateSpec& state, const MeasurementPlan& plan,
                         unsigned threads) {
  plan.validate();
  HomodyneDataset ds;
  ds.plan = plan;
  ds.state_label = state.label();
  const std::size_t n = plan.samples_per_phase;
  ds.samples.resize(plan.total_samples());

  // Resolve tabulated laws up front so table construction stays serial.
  std::vector<states::QuadratureLaw> laws(plan.n_phases);
  for (std::size_t j = 0; j < plan.n_phases; ++j) {
    laws[j] = states::quadrature_law(state, plan.theta(j), plan.eta);
  }

  parallel_for(plan.n_phases, resolve_thread_count(threads), [&](std::size_t j) {
    CounterRng rng = CounterRng::for_phase(plan.seed, j);
    const states::QuadratureLaw& law = laws[j];
    double* out = ds.samples.data() + j * n;
    if (law.gaussian) {
      for (std::size_t k = 0; k < n; k += 2) {
        // Box-Muller pair
        const double radius = std::sqrt(-2.0 * std::log(rng.next_open01()));
        const double angle = 2.0 * std::numbers::pi * rng.next_open01();
        out[k] = law.mean + law.stddev * radius * std::cos(angle);
        if (k + 1 < n) out[k + 1] = law.mean + law.stddev * radius * std::sin(angle);
      }
    } else {
      for (std::size_t k = 0; k < n; ++k) {
        out[k] = law.shift + law.table->sample(rng.next_open01());
      }
    }
  });
  return ds;
}

void write_dataset(const HomodyneDataset& ds, std::ostream& out,
                   std::span<const std::string> extra_comments) {
  const MeasurementPlan& plan = ds.plan;
  out << kMagic << '\n'
      << "# state=" << ds.state_label << '\n'
      << "# eta=" << format_shortest(plan.eta) << '\n'
      << "# phases=" << plan.n_phases << '\n'
      << "# samples_per_phase=" << plan.samples_per_phase << '\n'
      << "# seed=" << plan.seed << '\n';
  for (const std::string& c : extra_comments) out << "# " << c << '\n';
  out << kColumns << '\n';
  for (std::size_t j = 0; j < plan.n_phases; ++j) {
    const std::string prefix =
        std::to_string(j) + "," + format_significant(plan.theta(j), 17) + ",";
    for (double x : ds.phase_samples(j)) out << prefix << format_shortest(x) << '\n';
  }
  if (!out) throw std::runtime_error("write_dataset: stream error");
}

void write_dataset(const HomodyneDataset& ds, const std::filesystem::path& path,
                   std::span<const std::string> extra_comments) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_dataset(ds, out, extra_comments);
}

HomodyneDataset read_dataset(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++line_no;
    return true;
  };

  if (!next_line() || trim(line) != kMagic) {
    throw ParseError(line_no, "missing '# pml-dataset v1' header");
  }

  std::map<std::string, std::pair<std::string, std::size_t>> header;
  for (;;) {
    if (!next_line()) throw ParseError(line_no, "unexpected end of file in header");
    const std::string_view t = trim(line);
    if (t == kColumns) break;
    if (t.empty()) continue;
    if (t.front() != '#') {
      throw ParseError(line_no, "expected column header '" + std::string(kColumns) + "'");
    }
    const std::string_view body = trim(t.substr(1));
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) continue;  // free-form comment
    header[std::string(body.substr(0, eq))] = {std::string(body.substr(eq + 1)), line_no};
  }

  auto require = [&](const std::string& key) -> const std::pair<std::string, std::size_t>& {
    const auto it = header.find(key);
    if (it == header.end()) throw ParseError(line_no, "missing header field '" + key + "'");
    return it->second;
  };

  HomodyneDataset ds;
  ds.state_label = require("state").first;
  {
    const auto& [text, at] = require("eta");
    const auto eta = parse_double(text);
    if (!eta) throw ParseError(at, "eta is not a number");
    if (!(*eta > 0.0 && *eta <= 1.0)) throw ParseError(at, "eta out of range (0, 1]");
    ds.plan.eta = *eta;
  }
  {
    const auto& [text, at] = require("phases");
    const auto m = parse_integer<std::size_t>(text);
    if (!m || *m == 0) throw ParseError(at, "phases must be a positive integer");
    ds.plan.n_phases = *m;
  }
  {
    const auto& [text, at] = require("samples_per_phase");
    const auto n = parse_integer<std::size_t>(text);
    if (!n || *n == 0) throw ParseError(at, "samples_per_phase must be a positive integer");
    ds.plan.samples_per_phase = *n;
  }
  {
    const auto& [text, at] = require("seed");
    const auto seed = parse_integer<std::uint64_t>(text);
    if (!seed) throw ParseError(at, "seed must be an unsigned 64-bit integer");
    ds.plan.seed = *seed;
  }

  const std::size_t n = ds.plan.samples_per_phase;
  const std::size_t total = ds.plan.total_samples();
  ds.samples.reserve(total);
  std::size_t row = 0;
  double theta_j = 0.0;
  while (next_line()) {
    const std::string_view t = trim(line);
    if (t.empty()) continue;
    if (row >= total) {
      throw ParseError(line_no, "dimension mismatch: more rows than the declared " +
                                    std::to_string(ds.plan.n_phases) + " x " +
                                    std::to_string(n) + " samples");
    }
    const auto c1 = t.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : t.find(',', c1 + 1);
    if (c2 == std::string_view::npos || t.find(',', c2 + 1) != std::string_view::npos) {
      throw ParseError(line_no, "expected three comma-separated fields");
    }
    const auto phase = parse_integer<std::size_t>(t.substr(0, c1));
    const auto theta = parse_double(t.substr(c1 + 1, c2 - c1 - 1));
    const auto x = parse_double(t.substr(c2 + 1));
    if (!phase || !theta || !x) throw ParseError(line_no, "malformed number");
    const std::size_t expected_phase = row / n;
    if (*phase != expected_phase) {
      throw ParseError(line_no, "dimension mismatch: expected phase_index " +
                                    std::to_string(expected_phase) + " (rows of " +
                                    std::to_string(n) + " per phase, ascending)");
    }
    if (row % n == 0) theta_j = ds.plan.theta(expected_phase);
    if (std::abs(*theta - theta_j) > 1e-12) {
      throw ParseError(line_no, "theta does not match the equidistant grid 2*pi*j/M");
    }
    if (!std::isfinite(*x)) throw ParseError(line_no, "non-finite sample value");
    ds.samples.push_back(*x);
    ++row;
  }
  if (row != total) {
    throw ParseError(line_no, "dimension mismatch: header declares " +
                                  std::to_string(ds.plan.n_phases) + " phases x " +
                                  std::to_string(n) + " samples but the file holds " +
                                  std::to_string(row) + " rows");
  }
  return ds;
}

HomodyneDataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_dataset(in);
}

}  // namespace pml::homodyne
