#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pml/states.hpp"

/// Monte Carlo synthesis of balanced-homodyne records and the text dataset
/// format that carries them.
namespace pml::homodyne {

/// M equidistant phases theta_j = 2 pi j / M, N samples at each, recorded at
/// detection efficiency eta.
struct MeasurementPlan {
  std::size_t n_phases = 120;
  std::size_t samples_per_phase = 5000;
  double eta = 1.0;
  std::uint64_t seed = 0;

  double theta(std::size_t j) const;
  std::vector<double> theta_grid() const;
  std::size_t total_samples() const { return n_phases * samples_per_phase; }
  /// Throws std::domain_error on zero sizes or eta outside (0, 1].
  void validate() const;
};

struct HomodyneDataset {
  MeasurementPlan plan;
  std::vector<double> samples;  // phase-major: samples[j * N + k]
  std::string state_label;

  std::span<const double> phase_samples(std::size_t j) const {
    return std::span<const double>(samples).subspan(j * plan.samples_per_phase,
                                                    plan.samples_per_phase);
  }
};

/// Counter-based stream: the k-th draw is a pure function of (key, k).
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}
  /// Independent stream for one phase bin of a run.
  static CounterRng for_phase(std::uint64_t seed, std::size_t phase_index);

  std::uint64_t next_u64();
  /// Uniform deviate in the open interval (0, 1).
  double next_open01();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Draws N samples per phase from quadrature_pdf(state, theta_j, ., eta).
/// Output is a function of (state, plan) only; `threads` changes nothing but
/// wall time.
HomodyneDataset simulate(const states::StateSpec& state, const MeasurementPlan& plan,
                         unsigned threads = 0);

/// Dataset file ("# pml-dataset v1"). Extra `# key=value` comment lines are
/// written after the mandatory header and ignored on read.
void write_dataset(const HomodyneDataset& ds, std::ostream& out,
                   std::span<const std::string> extra_comments = {});
void write_dataset(const HomodyneDataset& ds, const std::filesystem::path& path,
                   std::span<const std::string> extra_comments = {});

/// Throws ParseError naming the offending line.
HomodyneDataset read_dataset(std::istream& in);
HomodyneDataset read_dataset(const std::filesystem::path& path);

}  // namespace pml::homodyne
