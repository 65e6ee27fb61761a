#pragma once

// Time-domain Langevin simulation of the driven three-port cavity.
//
// The cavity quadratures obey
//   dX = (-kappa/2 X + F_Y) dt + sum_j sqrt(kappa_j) x_in,j dt
//   dY = (-kappa/2 Y - F_X) dt + sum_j sqrt(kappa_j) y_in,j dt
// with white inputs of per-quadrature density s: (n_T + 1/2)/G and
// (n_T + 1/2) G on the measurement port, n_T + 1/2 on the loss port and
// 1/2 on the axion port. A finite-coherence force is a rotating complex
// Ornstein-Uhlenbeck process. Everything is linear, so each step is
// sampled exactly from the transition density of the augmented system
// (cavity, force, and the integrals needed for the measurement-port
// output x_out = x_in,m - sqrt(kappa_m) X over the step).

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "axsq/cavity.hpp"
#include "axsq/estimation.hpp"
#include "axsq/phasespace.hpp"
#include "axsq/random.hpp"

namespace axsq {

struct SimulationConfig {
  CavityParams params;
  ReceiverConfig cfg;
  std::optional<ForceSignal> signal;
  double dt = 0.01;
  std::size_t n_steps = 1000;
  std::size_t n_trajectories = 1;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument on a broken invariant (including
  /// dt > 0.05 / kappa and a non-flat or infinite squeezer gain).
  void validate() const;
  /// True when n_steps * dt >= 20 / kappa.
  bool long_enough_for_steady_state() const;
  double duration() const { return static_cast<double>(n_steps) * dt; }
};

/// How the cavity (and force) are initialized before the first step.
struct InitialCondition {
  enum class Kind { Stationary, Vacuum, State };
  Kind kind = Kind::Stationary;
  std::optional<GaussianState> cavity;  // single-mode, for Kind::State

  static InitialCondition stationary() { return {}; }
  static InitialCondition vacuum() { return {Kind::Vacuum, std::nullopt}; }
  static InitialCondition from_state(GaussianState s) { return {Kind::State, std::move(s)}; }
};

/// Sample path of one trajectory. times, x, y, force_x, force_y are sampled
/// at t_k = k dt, k = 0..n_steps. output_x/output_y hold the
/// measurement-port output averaged over each step (length n_steps).
struct Trajectory {
  std::vector<double> times;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> force_x;
  std::vector<double> force_y;
  std::vector<double> output_x;
  std::vector<double> output_y;
};

/// Exact one-step transition of the augmented linear system.
class LangevinModel {
 public:
  static constexpr int kDim = 8;
  enum Index { kX = 0, kY, kForceX, kForceY, kIntX, kIntY, kInX, kInY };
  using Vector = Eigen::Matrix<double, kDim, 1>;
  using Matrix = Eigen::Matrix<double, kDim, kDim>;

  explicit LangevinModel(const SimulationConfig& config);

  /// Drift matrix A of dz = A z dt + B dW.
  const Matrix& drift() const { return drift_; }
  /// B B^T.
  const Matrix& diffusion() const { return diffusion_; }
  /// exp(A dt).
  const Matrix& transition() const { return transition_; }
  /// Covariance of the noise accumulated over one step.
  const Matrix& step_covariance() const { return step_cov_; }

  /// Mean and covariance of (X, Y, F_X, F_Y) at t = 0.
  std::pair<Eigen::Vector4d, Eigen::Matrix4d> initial_moments(const InitialCondition& init) const;

  /// Advance one step; the integral slots are reset before stepping.
  void step(Vector& z, NormalStream& rng) const;
  /// Noise-free step, identical in structure to step().
  void step_deterministic(Vector& z) const;

  double dt() const { return dt_; }
  double sqrt_kappa_m() const { return sqrt_kappa_m_; }

 private:
  Matrix drift_;
  Matrix diffusion_;
  Matrix transition_;
  Matrix step_cov_;
  Matrix noise_factor_;
  double dt_;
  double sqrt_kappa_m_;
  SimulationConfig config_;
};

/// Samples F_X, F_Y at the given (nondecreasing) times. A coherent signal is
/// the deterministic tone; otherwise the exact OU transition between
/// consecutive times is used, starting from the stationary distribution.
std::pair<std::vector<double>, std::vector<double>> generate_force(const ForceSignal& signal,
                                                                   const std::vector<double>& times,
                                                                   NormalStream& rng);

/// Integrates one trajectory using the stream (config.seed, index).
Trajectory integrate_one(const SimulationConfig& config, std::size_t index,
                         const InitialCondition& init = InitialCondition::stationary());
/// Same, reusing a model built from config.
Trajectory integrate_one(const LangevinModel& model, const SimulationConfig& config, std::size_t index,
                         const InitialCondition& init = InitialCondition::stationary());

/// Integrates all config.n_trajectories trajectories (in parallel when
/// hardware threads are available; output does not depend on thread count).
std::vector<Trajectory> integrate(const SimulationConfig& config,
                                  const InitialCondition& init = InitialCondition::stationary());

/// Draws a sample from a Gaussian state.
class GaussianSampler {
 public:
  explicit GaussianSampler(const GaussianState& state);
  Eigen::VectorXd operator()(NormalStream& rng) const;

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd factor_;
};

enum class Protocol { Csl, Squeezed, TwoModeFy, TwoModeFx, Dissipative };

struct ForceVarianceEstimate {
  double estimator_mean;
  double variance;
  double standard_error;  // of the variance
  double expected;        // closed-form prediction for this configuration
  std::size_t n_samples;
  double t_s;
};

/// Minimum repetitions accepted by estimate_force_variance().
inline constexpr std::size_t kMinForceTrajectories = 100;

/// Empirical variance of a force estimator over config.n_trajectories
/// repetitions, with t_s = n_steps * dt.
///   Csl / Squeezed / TwoMode*: lossless phase-space protocol, F_Y (and F_X)
///     taken from the signal's phase at t = 0, squeezing from the flat gain.
///   Dissipative: trajectories from the stationary state; the estimate is
///     F_Y = -(kappa / (2 sqrt(kappa_m))) * <x_out>, the time-averaged
///     measurement-port output mapped back through X = 2 F_Y / kappa.
ForceVarianceEstimate estimate_force_variance(const SimulationConfig& config, Protocol protocol);

}  // namespace axsq
