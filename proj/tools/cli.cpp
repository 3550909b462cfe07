#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <set>

#include <CLI11.hpp>

#include "pml/errors.hpp"
#include "pml/estimator.hpp"
#include "pml/homodyne.hpp"
#include "pml/kernels.hpp"
#include "pml/numfmt.hpp"
#include "pml/phasedist.hpp"
#include "pml/states.hpp"

namespace pml::cli {

namespace {

using complex = std::complex<double>;

// Figure pipeline parameters.
constexpr double kFigZeta = 1.317;
constexpr double kFigEta = 0.8;
constexpr std::size_t kFigPhases = 120;
constexpr std::size_t kFigSamples = 5000;

std::string command_line(const std::vector<std::string>& args) {
  std::string cmd = "pml";
  for (const std::string& a : args) {
    cmd += ' ';
    if (a.empty() || a.find_first_of(" \t\"'") != std::string::npos) {
      cmd += '"' + a + '"';
    } else {
      cmd += a;
    }
  }
  return cmd;
}

/// Writes to `path`, or to `fallback` when path is "-".
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : os_(&fallback) {
    if (path != "-") {
      file_.open(path);
      if (!file_) throw std::runtime_error("cannot open " + path + " for writing");
      os_ = &file_;
    }
  }
  std::ostream& stream() { return *os_; }
  void finish() {
    os_->flush();
    if (!*os_) throw std::runtime_error("write failed");
  }

 private:
  std::ofstream file_;
  std::ostream* os_;
};

struct StateFlags {
  std::string kind = "sv";
  double zeta = 0.0;
  double psi = 0.0;
  double xi = 0.0;
  double phi = 0.0;
  int photons = 0;
  CLI::Option* zeta_opt = nullptr;
  CLI::Option* psi_opt = nullptr;
  CLI::Option* xi_opt = nullptr;
  CLI::Option* phi_opt = nullptr;
  CLI::Option* photons_opt = nullptr;
};

void add_state_flags(CLI::App* app, StateFlags& f) {
  app->add_option("--state", f.kind, "sv | coherent | vacuum | fock | dfock")
      ->check(CLI::IsMember({"sv", "coherent", "vacuum", "fock", "dfock"}));
  f.zeta_opt = app->add_option("--zeta", f.zeta, "squeezing modulus |zeta| (sv)");
  f.psi_opt = app->add_option("--psi", f.psi, "squeezing phase (sv)");
  f.xi_opt = app->add_option("--xi", f.xi, "coherent amplitude modulus |xi| (coherent, dfock)");
  f.phi_opt = app->add_option("--phi", f.phi, "coherent amplitude phase (coherent, dfock)");
  f.photons_opt = app->add_option("--n", f.photons, "photon number (fock, dfock)");
}

states::StateSpec build_state(const StateFlags& f) {
  struct Rule {
    std::set<std::string> allowed;
    std::set<std::string> required;
  };
  static const std::map<std::string, Rule> rules = {
      {"sv", {{"--zeta", "--psi"}, {"--zeta"}}},
      {"coherent", {{"--xi", "--phi"}, {"--xi"}}},
      {"vacuum", {{}, {}}},
      {"fock", {{"--n"}, {"--n"}}},
      {"dfock", {{"--n", "--xi", "--phi"}, {"--n", "--xi"}}},
  };
  const Rule& rule = rules.at(f.kind);
  const std::pair<const char*, CLI::Option*> given[] = {{"--zeta", f.zeta_opt},
                                                         {"--psi", f.psi_opt},
                                                         {"--xi", f.xi_opt},
                                                         {"--phi", f.phi_opt},
                                                         {"--n", f.photons_opt}};
  for (const auto& [name, opt] : given) {
    const bool present = opt->count() > 0;
    if (present && !rule.allowed.contains(name)) {
      throw UsageError(std::string(name) + " does not apply to --state " + f.kind);
    }
    if (!present && rule.required.contains(name)) {
      throw UsageError("--state " + f.kind + " requires " + name);
    }
  }
  if (f.kind == "sv") {
    if (!(f.zeta >= 0.0)) throw UsageError("--zeta must be non-negative");
    return states::StateSpec::squeezed_vacuum(f.zeta, f.psi);
  }
  if ((f.kind == "coherent" || f.kind == "dfock") && !(f.xi >= 0.0)) {
    throw UsageError("--xi must be non-negative");
  }
  if ((f.kind == "fock" || f.kind == "dfock") && f.photons < 0) {
    throw UsageError("--n must be non-negative");
  }
  const complex xi = std::polar(f.xi, f.phi);
  if (f.kind == "coherent") return states::StateSpec::coherent(xi);
  if (f.kind == "vacuum") return states::StateSpec::vacuum();
  if (f.kind == "fock") return states::StateSpec::fock(f.photons);
  return states::StateSpec::displaced_fock(f.photons, xi);
}

void write_metadata(std::ostream& os, const std::string& command,
                    std::optional<std::uint64_t> seed) {
  os << "# command=" << command << '\n'
     << "# seed=" << (seed ? std::to_string(*seed) : std::string("none")) << '\n';
}

void require_bound(double s, double eta) {
  (void)kernels::OrderingContext(s, eta);  // throws OrderingBoundError
}

std::vector<estimator::MomentEstimate> moments_for_range(const homodyne::HomodyneDataset& ds,
                                                         std::pair<int, int> l_range, double s,
                                                         unsigned threads) {
  const int l_max = std::max(std::abs(l_range.first), std::abs(l_range.second));
  const estimator::EstimatorOptions opts{threads};
  std::vector<estimator::MomentEstimate> spectrum;
  if (l_max >= 1) {
    spectrum = estimator::estimate_spectrum(ds, l_max, s, opts);
  } else {
    spectrum.push_back(estimator::estimate_moment(ds, 0, s, opts));
  }
  std::vector<estimator::MomentEstimate> out;
  for (int l = l_range.first; l <= l_range.second; ++l) {
    estimator::MomentEstimate e = spectrum[static_cast<std::size_t>(std::abs(l))];
    if (l < 0) {
      e.l = l;
      e.value = std::conj(e.value);
    }
    out.push_back(e);
  }
  return out;
}

int run_simulate(const StateFlags& sf, homodyne::MeasurementPlan plan, const std::string& output,
                 unsigned threads, const std::string& command, std::ostream& out) {
  const states::StateSpec state = build_state(sf);
  try {
    plan.validate();
  } catch (const std::domain_error& e) {
    throw UsageError(e.what());
  }
  const homodyne::HomodyneDataset ds = homodyne::simulate(state, plan, threads);
  Sink sink(output, out);
  const std::vector<std::string> extra = {"command=" + command};
  homodyne::write_dataset(ds, sink.stream(), extra);
  sink.finish();
  return 0;
}

int run_estimate(const std::string& input, const std::string& l_text, const std::string& s_text,
                 const std::string& output, unsigned threads, const std::string& command,
                 std::ostream& out) {
  const auto l_range = parse_int_range(l_text);
  const auto s_grid = parse_real_grid(s_text);
  const homodyne::HomodyneDataset ds = homodyne::read_dataset(std::filesystem::path(input));
  for (double s : s_grid) require_bound(s, ds.plan.eta);

  std::vector<estimator::MomentEstimate> all;
  for (double s : s_grid) {
    const auto part = moments_for_range(ds, l_range, s, threads);
    all.insert(all.end(), part.begin(), part.end());
  }
  Sink sink(output, out);
  estimator::write_moments_json(all, sink.stream(), command, ds.plan.seed);
  sink.finish();
  return 0;
}

int run_reconstruct(const std::string& input, std::optional<double> s_pick,
                    std::optional<int> l_max, std::size_t grid, bool lanczos,
                    const std::string& output, const std::string& command, std::ostream& out) {
  if (grid == 0) throw UsageError("--grid must be positive");
  std::ifstream in(input);
  if (!in) throw std::runtime_error("cannot open " + input);
  const estimator::MomentsDocument doc = estimator::read_moments_json(in);

  std::set<double> s_values;
  for (const auto& m : doc.moments) s_values.insert(m.s);
  if (!s_pick) {
    if (s_values.size() != 1) {
      throw UsageError("moments file holds " + std::to_string(s_values.size()) +
                       " distinct s values; select one with --s");
    }
    s_pick = *s_values.begin();
  }
  std::vector<estimator::MomentEstimate> chosen;
  for (const auto& m : doc.moments) {
    if (m.s == *s_pick && m.l >= 0 && (!l_max || m.l <= *l_max)) chosen.push_back(m);
  }
  if (chosen.empty()) throw UsageError("no moments at s=" + format_shortest(*s_pick));
  if (std::none_of(chosen.begin(), chosen.end(), [](const auto& m) { return m.l == 0; })) {
    chosen.push_back({0, *s_pick, {1.0, 0.0}, 0.0, 0.0, chosen.front().n_samples});
  }
  std::sort(chosen.begin(), chosen.end(),
            [](const auto& a, const auto& b) { return a.l < b.l; });

  const phasedist::PhaseCurve curve =
      phasedist::reconstruct(chosen, phasedist::ReconstructOptions{grid, lanczos});
  Sink sink(output, out);
  const std::vector<std::string> comments = {
      "command=" + command,
      "seed=" + (doc.seed ? std::to_string(*doc.seed) : std::string("none")),
      "source_command=" + doc.command,
      "min_p=" + format_shortest(*std::min_element(curve.values.begin(), curve.values.end()))};
  phasedist::write_curve_csv(curve, sink.stream(), comments);
  sink.finish();
  return 0;
}

void write_kernel_table(std::ostream& os, std::pair<int, int> l_range,
                        const std::vector<double>& u_grid) {
  os << 'u';
  for (int l = l_range.first; l <= l_range.second; ++l) os << ",F_" << l;
  for (int l = l_range.first; l <= l_range.second; ++l) os << ",K_" << l;
  os << '\n';
  for (double u : u_grid) {
    os << format_shortest(u);
    for (int l = l_range.first; l <= l_range.second; ++l) {
      os << ',' << format_shortest(kernels::filter_F(l, std::abs(u)));
    }
    for (int l = l_range.first; l <= l_range.second; ++l) {
      os << ',' << format_shortest(kernels::kernel_base(l, u));
    }
    os << '\n';
  }
}

int run_kernels(const std::string& l_text, const std::string& u_text, const std::string& output,
                const std::string& command, std::ostream& out) {
  const auto l_range = parse_int_range(l_text);
  if (l_range.first < 1) throw UsageError("--l must select orders >= 1");
  const auto u_grid = parse_real_grid(u_text);
  Sink sink(output, out);
  write_metadata(sink.stream(), command, std::nullopt);
  write_kernel_table(sink.stream(), l_range, u_grid);
  sink.finish();
  return 0;
}

int run_oracle(const StateFlags& sf, const std::string& l_text, const std::string& s_text,
               std::size_t curve_points, const std::string& output, const std::string& command,
               std::ostream& out) {
  states::StateSpec state = build_state(sf);
  const auto s_grid = parse_real_grid(s_text);
  for (double s : s_grid) {
    if (!(s < 1.0)) throw UsageError("--s must be below 1");
  }
  if (curve_points > 0) {
    // the closed-form curve is written for the squeezed family
    if (sf.kind == "vacuum") {
      state = states::StateSpec::squeezed_vacuum(0.0, 0.0);
    } else if (sf.kind != "sv") {
      throw UsageError("--curve needs --state sv or vacuum");
    }
  }
  Sink sink(output, out);
  std::ostream& os = sink.stream();
  write_metadata(os, command, std::nullopt);
  os << "# state=" << state.label() << '\n';
  if (curve_points > 0) {
    os << "s,theta,p\n";
    for (double s : s_grid) {
      for (std::size_t k = 0; k < curve_points; ++k) {
        const double theta =
            2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(curve_points);
        os << format_shortest(s) << ',' << format_shortest(theta) << ','
           << format_shortest(states::exact_phase_distribution(state, s, theta)) << '\n';
      }
    }
  } else {
    const auto l_range = parse_int_range(l_text);
    os << "s,l,re,im\n";
    for (double s : s_grid) {
      for (int l = l_range.first; l <= l_range.second; ++l) {
        const complex v = states::exact_phase_moment(state, l, s);
        os << format_shortest(s) << ',' << l << ',' << format_shortest(v.real()) << ','
           << format_shortest(v.imag()) << '\n';
      }
    }
  }
  sink.finish();
  return 0;
}

int run_reproduce(const std::string& outdir, std::uint64_t seed, int l_max, unsigned threads,
                  const std::string& command, std::ostream& out) {
  if (l_max < 1) throw UsageError("--lmax must be positive");
  const std::filesystem::path dir(outdir);
  std::filesystem::create_directories(dir);

  const states::StateSpec state = states::StateSpec::squeezed_vacuum(kFigZeta, 0.0);
  homodyne::MeasurementPlan plan;
  plan.n_phases = kFigPhases;
  plan.samples_per_phase = kFigSamples;
  plan.eta = kFigEta;
  plan.seed = seed;

  auto open = [&](const char* name) {
    std::ofstream f(dir / name);
    if (!f) throw std::runtime_error("cannot open " + (dir / name).string() + " for writing");
    write_metadata(f, command, seed);
    f << "# state=" << state.label() << "\n# eta=" << format_shortest(plan.eta)
      << "\n# phases=" << plan.n_phases << "\n# samples_per_phase=" << plan.samples_per_phase
      << '\n';
    return f;
  };

  {
    std::ofstream f = open("fig1-3.csv");
    write_kernel_table(f, {1, 4}, parse_real_grid("0:6:0.05"));
    if (!f) throw std::runtime_error("write failed: fig1-3.csv");
  }

  const homodyne::HomodyneDataset ds = homodyne::simulate(state, plan, threads);
  const estimator::EstimatorOptions opts{threads};

  const auto spectrum = estimator::estimate_spectrum(ds, l_max, -1.0, opts);
  {
    std::ofstream f = open("fig4.csv");
    f << "# s=-1\nl,re,im,stderr_re,stderr_im,exact_re,exact_im\n";
    for (const auto& m : spectrum) {
      const complex ex = states::exact_phase_moment(state, m.l, m.s);
      f << m.l << ',' << format_shortest(m.value.real()) << ','
        << format_shortest(m.value.imag()) << ',' << format_shortest(m.stderr_re) << ','
        << format_shortest(m.stderr_im) << ',' << format_shortest(ex.real()) << ','
        << format_shortest(ex.imag()) << '\n';
    }
    if (!f) throw std::runtime_error("write failed: fig4.csv");
  }

  const phasedist::PhaseCurve curve = phasedist::reconstruct(spectrum);
  std::size_t inside = 0;
  {
    std::ofstream f = open("fig5.csv");
    f << "# s=-1\n# L=" << curve.truncation_L << "\ntheta,p,perr,exact\n";
    for (std::size_t k = 0; k < curve.values.size(); ++k) {
      const double ex = states::exact_phase_distribution(state, -1.0, curve.theta[k]);
      if (std::abs(curve.values[k] - ex) <= 3.0 * curve.pointwise_err[k]) ++inside;
      f << format_shortest(curve.theta[k]) << ',' << format_shortest(curve.values[k]) << ','
        << format_shortest(curve.pointwise_err[k]) << ',' << format_shortest(ex) << '\n';
    }
    if (!f) throw std::runtime_error("write failed: fig5.csv");
  }

  {
    std::ofstream f = open("fig6.csv");
    f << "s,l,re,im,stderr_re,stderr_im,exact_re,exact_im\n";
    for (double s : parse_real_grid("-4:-0.3:0.1")) {
      const auto sp = estimator::estimate_spectrum(ds, 4, s, opts);
      for (int l = 1; l <= 4; ++l) {
        const auto& m = sp[static_cast<std::size_t>(l)];
        const complex ex = states::exact_phase_moment(state, l, s);
        f << format_shortest(s) << ',' << l << ',' << format_shortest(m.value.real()) << ','
          << format_shortest(m.value.imag()) << ',' << format_shortest(m.stderr_re) << ','
          << format_shortest(m.stderr_im) << ',' << format_shortest(ex.real()) << ','
          << format_shortest(ex.imag()) << '\n';
      }
    }
    if (!f) throw std::runtime_error("write failed: fig6.csv");
  }

  out << "wrote fig1-3.csv fig4.csv fig5.csv fig6.csv to " << dir.string() << '\n'
      << "Psi_2(-1) = " << format_significant(spectrum[2].value.real(), 6) << " +- "
      << format_significant(spectrum[2].combined_stderr(), 2) << '\n'
      << "curve nodes inside 3 sigma of exact: " << inside << '/' << curve.values.size() << '\n';
  return 0;
}

}  // namespace

std::pair<int, int> parse_int_range(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    const auto v = parse_integer<int>(text);
    if (!v) throw UsageError("expected an integer or a:b, got '" + text + "'");
    return {*v, *v};
  }
  const auto a = parse_integer<int>(std::string_view(text).substr(0, colon));
  const auto b = parse_integer<int>(std::string_view(text).substr(colon + 1));
  if (!a || !b) throw UsageError("expected an integer range a:b, got '" + text + "'");
  if (*a > *b) throw UsageError("empty range '" + text + "'");
  return {*a, *b};
}

std::vector<double> parse_real_grid(const std::string& text) {
  std::vector<std::string_view> parts;
  std::string_view rest(text);
  for (;;) {
    const auto colon = rest.find(':');
    parts.push_back(rest.substr(0, colon));
    if (colon == std::string_view::npos) break;
    rest.remove_prefix(colon + 1);
  }
  std::vector<double> nums;
  for (auto p : parts) {
    const auto v = parse_double(p);
    if (!v || !std::isfinite(*v)) throw UsageError("malformed number in '" + text + "'");
    nums.push_back(*v);
  }
  if (nums.size() == 1) return nums;
  if (nums.size() != 3) throw UsageError("expected a value or a:b:step, got '" + text + "'");
  const double a = nums[0];
  const double b = nums[1];
  const double step = nums[2];
  if (!(step > 0.0) || b < a) throw UsageError("grid '" + text + "' needs a <= b and step > 0");
  const auto count = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9)) + 1;
  if (count > 10'000'000) throw UsageError("grid '" + text + "' is too large");
  std::vector<double> grid(count);
  // Round nodes to the decimals written in a and step, so -1:0:0.1 contains -0.2 exactly.
  std::optional<int> decimals = 0;
  for (std::size_t k : {std::size_t{0}, std::size_t{2}}) {
    const std::string_view p = parts[k];
    if (p.find_first_of("eE") != std::string_view::npos) {
      decimals.reset();
      break;
    }
    const auto dot = p.find('.');
    if (dot != std::string_view::npos) {
      decimals = std::max(*decimals, static_cast<int>(p.size() - dot - 1));
    }
  }
  for (std::size_t i = 0; i < count; ++i) {
    double v = a + static_cast<double>(i) * step;
    if (decimals && *decimals <= 15) {
      char buf[64];
      const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, *decimals);
      v = *parse_double(std::string_view(buf, static_cast<std::size_t>(res.ptr - buf)));
      if (v == 0.0) v = 0.0;  // drop the sign of -0
    }
    grid[i] = v;
  }
  return grid;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Phase moments of quasidistributions from simulated homodyne data", "pml"};
  app.require_subcommand(1);

  std::string output = "-";
  unsigned threads = 0;

  StateFlags sim_state;
  homodyne::MeasurementPlan plan;
  auto* sim = app.add_subcommand("simulate", "Simulate a balanced-homodyne dataset");
  add_state_flags(sim, sim_state);
  sim->add_option("--eta", plan.eta, "detection efficiency in (0, 1]");
  sim->add_option("--phases", plan.n_phases, "number of equidistant phases M");
  sim->add_option("--samples", plan.samples_per_phase, "samples per phase N");
  sim->add_option("--seed", plan.seed, "random seed");
  sim->add_option("-o,--output", output, "dataset path ('-' for stdout)");
  sim->add_option("--threads", threads, "worker threads (default: PML_THREADS or all cores)");

  std::string input;
  std::string l_text = "0:10";
  std::string s_text = "-1";
  auto* est = app.add_subcommand("estimate", "Sample phase moments Psi_l(s) from a dataset");
  est->add_option("-i,--input", input, "dataset path")->required();
  est->add_option("--l", l_text, "moment orders a:b");
  est->add_option("--s", s_text, "ordering parameter s or grid a:b:step");
  est->add_option("-o,--output", output, "moments JSON path ('-' for stdout)");
  est->add_option("--threads", threads, "worker threads");

  std::optional<double> rec_s;
  std::optional<int> rec_lmax;
  std::size_t grid = 512;
  bool lanczos = false;
  auto* rec = app.add_subcommand("reconstruct", "Fourier-synthesise P_s(theta) from moments");
  rec->add_option("-i,--input", input, "moments JSON path")->required();
  rec->add_option("--s", rec_s, "select moments at this s");
  rec->add_option("--lmax", rec_lmax, "truncation order L (default: all available)");
  rec->add_option("--grid", grid, "number of theta nodes");
  rec->add_flag("--lanczos", lanczos, "apply Lanczos sigma factors");
  rec->add_option("-o,--output", output, "curve CSV path ('-' for stdout)");

  std::string k_l_text = "1:4";
  std::string u_text = "0:6:0.05";
  auto* ker = app.add_subcommand("kernels", "Tabulate filtering functions F_l and kernels K_l");
  ker->add_option("--l", k_l_text, "orders a:b, a >= 1");
  ker->add_option("--u", u_text, "argument grid a:b:step");
  ker->add_option("-o,--output", output, "CSV path ('-' for stdout)");

  StateFlags ora_state;
  std::string ora_l_text = "0:10";
  std::string ora_s_text = "-1";
  std::size_t curve_points = 0;
  auto* ora = app.add_subcommand("oracle", "Exact phase moments or phase distribution");
  add_state_flags(ora, ora_state);
  ora->add_option("--l", ora_l_text, "moment orders a:b");
  ora->add_option("--s", ora_s_text, "ordering parameter s or grid a:b:step");
  ora->add_option("--curve", curve_points, "emit P_s(theta) on this many nodes instead");
  ora->add_option("-o,--output", output, "CSV path ('-' for stdout)");

  std::string outdir = ".";
  std::uint64_t fig_seed = 42;
  int fig_lmax = 10;
  auto* rep = app.add_subcommand("reproduce-figures",
                                 "Run the squeezed-vacuum pipeline and write figure tables");
  rep->add_option("--outdir", outdir, "output directory");
  rep->add_option("--seed", fig_seed, "random seed");
  rep->add_option("--lmax", fig_lmax, "truncation order L");
  rep->add_option("--threads", threads, "worker threads");

  try {
    app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "pml: " << e.what() << '\n';
    if (e.get_name() == "RequiredError" && app.get_subcommands().empty()) {
      err << "subcommands: simulate, estimate, reconstruct, kernels, oracle, reproduce-figures\n";
    }
    return 2;
  }

  const std::string command = command_line(args);
  try {
    if (sim->parsed()) return run_simulate(sim_state, plan, output, threads, command, out);
    if (est->parsed()) {
      return run_estimate(input, l_text, s_text, output, threads, command, out);
    }
    if (rec->parsed()) {
      return run_reconstruct(input, rec_s, rec_lmax, grid, lanczos, output, command, out);
    }
    if (ker->parsed()) return run_kernels(k_l_text, u_text, output, command, out);
    if (ora->parsed()) {
      return run_oracle(ora_state, ora_l_text, ora_s_text, curve_points, output, command, out);
    }
    if (rep->parsed()) return run_reproduce(outdir, fig_seed, fig_lmax, threads, command, out);
  } catch (const UsageError& e) {
    err << "pml: " << e.what() << '\n';
    return 2;
  } catch (const OrderingBoundError& e) {
    err << "pml: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "pml: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace pml::cli
