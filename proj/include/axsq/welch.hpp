#pragma once

// Welch-averaged periodograms and their comparison with the analytic
// output spectrum.
//
// Density convention: two-sided in angular frequency, so a white process
// with <x(t) x(t')> = S delta(t - t') has flat density S. Samples are
// treated as step averages of the continuous process.

#include <memory>
#include <span>
#include <vector>

#include "axsq/cavity.hpp"
#include "axsq/langevin.hpp"

namespace axsq {

struct WelchOptions {
  std::size_t segment_length = 1024;
  double overlap = 0.5;  // fraction of segment_length shared by neighbours
};

/// Streaming Welch estimator with a Hann window; accumulators are additive,
/// so partial results may be merged.
class WelchAccumulator {
 public:
  WelchAccumulator(std::size_t segment_length, double overlap, double dt);
  ~WelchAccumulator();
  WelchAccumulator(WelchAccumulator&&) noexcept;
  WelchAccumulator& operator=(WelchAccumulator&&) noexcept;

  /// Adds every full segment of one contiguous record.
  void add_record(std::span<const double> samples);
  /// Adds the segment sums of another accumulator with identical settings.
  void merge(const WelchAccumulator& other);

  std::size_t segments() const { return segments_; }
  std::size_t segment_length() const { return length_; }
  double dt() const { return dt_; }
  /// Averaged density at omega_k = 2 pi k / (L dt), k = 0..L/2.
  SpectrumGrid result() const;

 private:
  struct FftPlan;
  std::size_t length_;
  std::size_t hop_;
  double dt_;
  std::vector<double> window_;
  double window_power_ = 0.0;
  std::vector<double> sums_;
  std::size_t segments_ = 0;
  std::unique_ptr<FftPlan> plan_;
};

/// Welch PSD of the measurement-port output x-quadrature of trajectories.
SpectrumGrid estimate_psd(const std::vector<Trajectory>& trajectories, std::size_t segment_length,
                          double overlap = 0.5);

struct PsdEstimate {
  SpectrumGrid spectrum;
  std::size_t segments;
};

/// Integrates config.n_trajectories trajectories and streams their output
/// into a Welch estimate without storing the sample paths.
PsdEstimate simulate_output_psd(const SimulationConfig& config, const WelchOptions& options,
                                const InitialCondition& init = InitialCondition::stationary());

struct PsdComparisonRow {
  double omega;
  double measured;
  double analytic;
  double rel_err;
};

struct PsdComparison {
  std::vector<PsdComparisonRow> rows;
  double worst_rel_err = 0.0;
  double worst_omega = 0.0;
  bool pass = false;
};

/// Compares bins with omega <= omega_max against output_spectrum().
PsdComparison compare_with_analytic(const SpectrumGrid& measured, const CavityParams& params,
                                    const ReceiverConfig& cfg, double omega_max, double tolerance);

}  // namespace axsq
