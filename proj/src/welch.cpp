#include "axsq/welch.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "parallel.hpp"

namespace axsq {
namespace {

// FFTW planning is not thread-safe; execution with new-array functions is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

struct WelchAccumulator::FftPlan {
  explicit FftPlan(std::size_t n) : length(n) {
    in = fftw_alloc_real(n);
    out = fftw_alloc_complex(n / 2 + 1);
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);
  }
  ~FftPlan() {
    {
      std::lock_guard lock(planner_mutex());
      fftw_destroy_plan(plan);
    }
    fftw_free(in);
    fftw_free(out);
  }
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  std::size_t length;
  double* in;
  fftw_complex* out;
  fftw_plan plan;
};

WelchAccumulator::WelchAccumulator(std::size_t segment_length, double overlap, double dt)
    : length_(segment_length), dt_(dt) {
  if (segment_length < 2) throw std::invalid_argument("segment_length must be >= 2");
  if (!(overlap >= 0.0 && overlap < 1.0)) throw std::invalid_argument("overlap must lie in [0, 1)");
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  hop_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround((1.0 - overlap) * segment_length)));
  window_.resize(length_);
  for (std::size_t n = 0; n < length_; ++n) {
    window_[n] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(n) / static_cast<double>(length_)));
    window_power_ += window_[n] * window_[n];
  }
  sums_.assign(length_ / 2 + 1, 0.0);
  plan_ = std::make_unique<FftPlan>(length_);
}

WelchAccumulator::~WelchAccumulator() = default;
WelchAccumulator::WelchAccumulator(WelchAccumulator&&) noexcept = default;
WelchAccumulator& WelchAccumulator::operator=(WelchAccumulator&&) noexcept = default;

void WelchAccumulator::add_record(std::span<const double> samples) {
  for (std::size_t start = 0; start + length_ <= samples.size(); start += hop_) {
    for (std::size_t n = 0; n < length_; ++n) plan_->in[n] = window_[n] * samples[start + n];
    fftw_execute_dft_r2c(plan_->plan, plan_->in, plan_->out);
    for (std::size_t k = 0; k < sums_.size(); ++k) {
      sums_[k] += plan_->out[k][0] * plan_->out[k][0] + plan_->out[k][1] * plan_->out[k][1];
    }
    ++segments_;
  }
}

void WelchAccumulator::merge(const WelchAccumulator& other) {
  if (other.length_ != length_ || other.hop_ != hop_ || other.dt_ != dt_) {
    throw std::invalid_argument("cannot merge Welch accumulators with different settings");
  }
  for (std::size_t k = 0; k < sums_.size(); ++k) sums_[k] += other.sums_[k];
  segments_ += other.segments_;
}

SpectrumGrid WelchAccumulator::result() const {
  if (segments_ == 0) throw std::invalid_argument("insufficient data for one Welch segment");
  SpectrumGrid grid;
  grid.omegas.resize(sums_.size());
  grid.values.resize(sums_.size());
  const double norm = dt_ / (window_power_ * static_cast<double>(segments_));
  for (std::size_t k = 0; k < sums_.size(); ++k) {
    grid.omegas[k] = 2.0 * std::numbers::pi * static_cast<double>(k) / (static_cast<double>(length_) * dt_);
    grid.values[k] = sums_[k] * norm;
  }
  return grid;
}

SpectrumGrid estimate_psd(const std::vector<Trajectory>& trajectories, std::size_t segment_length, double overlap) {
  if (trajectories.empty() || trajectories.front().times.size() < 2) {
    throw std::invalid_argument("insufficient data for one Welch segment");
  }
  const double dt = trajectories.front().times[1] - trajectories.front().times[0];
  WelchAccumulator acc(segment_length, overlap, dt);
  for (const auto& t : trajectories) acc.add_record(t.output_x);
  return acc.result();
}

PsdEstimate simulate_output_psd(const SimulationConfig& config, const WelchOptions& options,
                                const InitialCondition& init) {
  config.validate();
  if (config.n_steps < options.segment_length) {
    throw std::invalid_argument("trajectory shorter than one Welch segment");
  }
  std::vector<WelchAccumulator> parts;
  parts.reserve(config.n_trajectories);
  for (std::size_t i = 0; i < config.n_trajectories; ++i) {
    parts.emplace_back(options.segment_length, options.overlap, config.dt);
  }
  const LangevinModel model(config);
  detail::parallel_for(config.n_trajectories, [&](std::size_t i) {
    const auto traj = integrate_one(model, config, i, init);
    parts[i].add_record(traj.output_x);
  });
  // Merge in trajectory order so results do not depend on scheduling.
  WelchAccumulator total(options.segment_length, options.overlap, config.dt);
  for (const auto& p : parts) total.merge(p);
  return {total.result(), total.segments()};
}

PsdComparison compare_with_analytic(const SpectrumGrid& measured, const CavityParams& params,
                                    const ReceiverConfig& cfg, double omega_max, double tolerance) {
  PsdComparison cmp;
  for (std::size_t k = 0; k < measured.omegas.size(); ++k) {
    const double w = measured.omegas[k];
    if (w > omega_max) break;
    const double analytic = output_spectrum(w, params, cfg);
    const double rel = (measured.values[k] - analytic) / analytic;
    cmp.rows.push_back({w, measured.values[k], analytic, rel});
    if (std::abs(rel) >= std::abs(cmp.worst_rel_err)) {
      cmp.worst_rel_err = rel;
      cmp.worst_omega = w;
    }
  }
  cmp.pass = !cmp.rows.empty() && std::abs(cmp.worst_rel_err) <= tolerance;
  return cmp;
}

}  // namespace axsq
