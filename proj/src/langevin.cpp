#include "axsq/langevin.hpp"

#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>
#include <unsupported/Eigen/MatrixFunctions>

#include "parallel.hpp"

namespace axsq {
namespace {

constexpr double kMaxStepTimesKappa = 0.05;

// Per-quadrature input noise densities.
struct InputNoise {
  double meas_x, meas_y, loss, ax;
};

InputNoise input_noise(const SimulationConfig& c) {
  const double thermal = c.cfg.n_thermal + 0.5;
  const double g = c.cfg.gain.flat_value();
  return {thermal / g, thermal * g, thermal, 0.5};
}

double force_decay(const ForceSignal& s) { return s.coherent() ? 0.0 : 1.0 / s.tau0; }

// Symmetric square root factor of a PSD matrix (negative round-off clipped).
template <class M>
M psd_factor(const M& cov) {
  Eigen::SelfAdjointEigenSolver<M> eig(cov);
  const auto sqrt_lambda = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * sqrt_lambda.asDiagonal();
}

// Lower Cholesky factor restricted to the flagged coordinates; the others get
// no noise. Unlike an eigenvector factor this is continuous in the
// parameters, so a fixed seed maps to the same noise path when, say, only
// the force changes.
template <class M>
M noise_factor(const M& cov, const std::vector<int>& active) {
  const auto n = static_cast<Eigen::Index>(active.size());
  Eigen::MatrixXd sub(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) sub(i, j) = cov(active[i], active[j]);
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(sub);
  if (llt.info() != Eigen::Success) return psd_factor(cov);
  const Eigen::MatrixXd l = llt.matrixL();
  M out = M::Zero();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) out(active[i], active[j]) = l(i, j);
  }
  return out;
}

template <class M>
std::vector<int> nonzero_diagonal(const M& cov) {
  std::vector<int> idx;
  for (int i = 0; i < cov.rows(); ++i) {
    if (cov(i, i) > 0.0) idx.push_back(i);
  }
  return idx;
}

// Solves A P + P A^T + D = 0 for stable A.
Eigen::Matrix4d solve_lyapunov(const Eigen::Matrix4d& a, const Eigen::Matrix4d& d) {
  Eigen::Matrix<double, 16, 16> k = Eigen::Matrix<double, 16, 16>::Zero();
  const Eigen::Matrix4d id = Eigen::Matrix4d::Identity();
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      k.block<4, 4>(4 * i, 4 * j) += id(i, j) * a + a(i, j) * id;
    }
  }
  const Eigen::Matrix<double, 16, 1> rhs = -Eigen::Map<const Eigen::Matrix<double, 16, 1>>(d.data());
  const Eigen::Matrix<double, 16, 1> sol = k.fullPivLu().solve(rhs);
  Eigen::Matrix4d p = Eigen::Map<const Eigen::Matrix4d>(sol.data());
  return 0.5 * (p + p.transpose());
}

}  // namespace

void SimulationConfig::validate() const {
  params.validate();
  cfg.validate();
  if (!cfg.gain.is_flat()) throw std::invalid_argument("simulation supports only a frequency-flat squeezer gain");
  if (!std::isfinite(cfg.gain.flat_value())) throw std::invalid_argument("simulation needs a finite squeezer gain");
  if (signal) signal->validate();
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
  if (dt > kMaxStepTimesKappa / params.kappa() * (1.0 + 1e-12)) {
    throw std::invalid_argument("dt must not exceed 0.05 / kappa");
  }
  if (n_steps == 0) throw std::invalid_argument("n_steps must be positive");
  if (n_trajectories == 0) throw std::invalid_argument("n_trajectories must be positive");
}

bool SimulationConfig::long_enough_for_steady_state() const { return duration() * params.kappa() >= 20.0; }

LangevinModel::LangevinModel(const SimulationConfig& config) : dt_(config.dt), config_(config) {
  config.validate();
  const auto& p = config.params;
  const auto noise = input_noise(config);
  const double half = 0.5 * p.kappa();
  const ForceSignal signal = config.signal.value_or(ForceSignal{});
  const double gamma = force_decay(signal);
  sqrt_kappa_m_ = std::sqrt(p.kappa_m);

  drift_.setZero();
  drift_(kX, kX) = -half;
  drift_(kX, kForceY) = 1.0;
  drift_(kY, kY) = -half;
  drift_(kY, kForceX) = -1.0;
  drift_(kForceX, kForceX) = -gamma;
  drift_(kForceX, kForceY) = -signal.delta;
  drift_(kForceY, kForceX) = signal.delta;
  drift_(kForceY, kForceY) = -gamma;
  drift_(kIntX, kX) = 1.0;
  drift_(kIntY, kY) = 1.0;

  // Noise channels: (m_x, m_y, loss_x, loss_y, ax_x, ax_y, force_x, force_y).
  Matrix b = Matrix::Zero();
  b(kX, 0) = std::sqrt(p.kappa_m * noise.meas_x);
  b(kX, 2) = std::sqrt(p.kappa_loss * noise.loss);
  b(kX, 4) = std::sqrt(p.kappa_ax * noise.ax);
  b(kY, 1) = std::sqrt(p.kappa_m * noise.meas_y);
  b(kY, 3) = std::sqrt(p.kappa_loss * noise.loss);
  b(kY, 5) = std::sqrt(p.kappa_ax * noise.ax);
  const double force_sigma = std::sqrt(gamma) * signal.f0;  // stationary variance f0^2 / 2
  b(kForceX, 6) = force_sigma;
  b(kForceY, 7) = force_sigma;
  b(kInX, 0) = std::sqrt(noise.meas_x);
  b(kInY, 1) = std::sqrt(noise.meas_y);
  diffusion_ = b * b.transpose();

  // Van Loan: exp([[-A, D], [0, A^T]] dt) = [[., E12], [0, E22]],
  // transition = E22^T, step covariance = transition * E12.
  Eigen::Matrix<double, 2 * kDim, 2 * kDim> vl = Eigen::Matrix<double, 2 * kDim, 2 * kDim>::Zero();
  vl.topLeftCorner<kDim, kDim>() = -drift_ * dt_;
  vl.topRightCorner<kDim, kDim>() = diffusion_ * dt_;
  vl.bottomRightCorner<kDim, kDim>() = drift_.transpose() * dt_;
  const Eigen::Matrix<double, 2 * kDim, 2 * kDim> e = vl.exp();
  transition_ = e.bottomRightCorner<kDim, kDim>().transpose();
  step_cov_ = transition_ * e.topRightCorner<kDim, kDim>();
  step_cov_ = 0.5 * (step_cov_ + step_cov_.transpose());
  std::vector<int> active{kX, kY, kIntX, kIntY, kInX, kInY};
  if (force_sigma > 0.0) {
    active.push_back(kForceX);
    active.push_back(kForceY);
  }
  noise_factor_ = noise_factor(step_cov_, active);
}

std::pair<Eigen::Vector4d, Eigen::Matrix4d> LangevinModel::initial_moments(const InitialCondition& init) const {
  const ForceSignal signal = config_.signal.value_or(ForceSignal{});
  Eigen::Vector4d mean = Eigen::Vector4d::Zero();
  Eigen::Matrix4d cov = Eigen::Matrix4d::Zero();
  const bool ou_force = config_.signal.has_value() && !signal.coherent();
  if (config_.signal && signal.coherent()) {
    mean(kForceX) = signal.f0 * std::cos(signal.phi);
    mean(kForceY) = signal.f0 * std::sin(signal.phi);
  }
  if (ou_force) cov.bottomRightCorner<2, 2>() = 0.5 * signal.f0 * signal.f0 * Eigen::Matrix2d::Identity();

  switch (init.kind) {
    case InitialCondition::Kind::Stationary: {
      const Eigen::Matrix4d a = drift_.topLeftCorner<4, 4>();
      const Eigen::Matrix4d d = diffusion_.topLeftCorner<4, 4>();
      if (ou_force) {
        cov = solve_lyapunov(a, d);
      } else {
        const double kappa = config_.params.kappa();
        cov(kX, kX) = d(kX, kX) / kappa;
        cov(kY, kY) = d(kY, kY) / kappa;
        // Periodic particular solution of Z = X + iY under the tone:
        // dZ/dt = -kappa/2 Z - i F0 exp(i(delta t + phi)).
        const std::complex<double> tone = std::polar(signal.f0, signal.phi);
        const std::complex<double> z =
            -std::complex<double>(0.0, 1.0) * tone / std::complex<double>(0.5 * kappa, signal.delta);
        mean(kX) = z.real();
        mean(kY) = z.imag();
      }
      break;
    }
    case InitialCondition::Kind::Vacuum:
      cov(kX, kX) = 0.5;
      cov(kY, kY) = 0.5;
      break;
    case InitialCondition::Kind::State: {
      if (!init.cavity || init.cavity->n_modes() != 1) {
        throw std::invalid_argument("initial cavity state must be a single-mode GaussianState");
      }
      mean.head<2>() = init.cavity->mean();
      cov.topLeftCorner<2, 2>() = init.cavity->cov();
      break;
    }
  }
  return {mean, cov};
}

void LangevinModel::step(Vector& z, NormalStream& rng) const {
  z.tail<4>().setZero();
  Vector xi;
  for (int i = 0; i < kDim; ++i) xi(i) = rng.normal();
  z = transition_ * z + noise_factor_ * xi;
}

void LangevinModel::step_deterministic(Vector& z) const {
  z.tail<4>().setZero();
  z = transition_ * z;
}

std::pair<std::vector<double>, std::vector<double>> generate_force(const ForceSignal& signal,
                                                                   const std::vector<double>& times,
                                                                   NormalStream& rng) {
  signal.validate();
  std::vector<double> fx(times.size());
  std::vector<double> fy(times.size());
  if (signal.coherent()) {
    for (std::size_t k = 0; k < times.size(); ++k) {
      const double arg = signal.delta * times[k] + signal.phi;
      fx[k] = signal.f0 * std::cos(arg);
      fy[k] = signal.f0 * std::sin(arg);
    }
    return {fx, fy};
  }
  const double stationary_sd = signal.f0 / std::sqrt(2.0);
  double cx = stationary_sd * rng.normal();
  double cy = stationary_sd * rng.normal();
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (k > 0) {
      const double h = times[k] - times[k - 1];
      if (h < 0.0) throw std::invalid_argument("times must be nondecreasing");
      const double decay = std::exp(-h / signal.tau0);
      const double c = std::cos(signal.delta * h);
      const double s = std::sin(signal.delta * h);
      const double sd = stationary_sd * std::sqrt(-std::expm1(-2.0 * h / signal.tau0));
      const double nx = decay * (c * cx - s * cy) + sd * rng.normal();
      const double ny = decay * (s * cx + c * cy) + sd * rng.normal();
      cx = nx;
      cy = ny;
    }
    fx[k] = cx;
    fy[k] = cy;
  }
  return {fx, fy};
}

namespace {

LangevinModel::Vector draw_initial(const LangevinModel& model, const InitialCondition& init, NormalStream& rng) {
  const auto [mean, cov] = model.initial_moments(init);
  const Eigen::Matrix4d factor = noise_factor(cov, nonzero_diagonal(cov));
  Eigen::Vector4d xi;
  for (int i = 0; i < 4; ++i) xi(i) = rng.normal();
  LangevinModel::Vector z = LangevinModel::Vector::Zero();
  z.head<4>() = mean + factor * xi;
  return z;
}

Trajectory run_trajectory(const LangevinModel& model, const SimulationConfig& config, std::size_t index,
                          const InitialCondition& init) {
  NormalStream rng(config.seed, index);
  const std::size_t n = config.n_steps;
  Trajectory t;
  t.times.resize(n + 1);
  t.x.resize(n + 1);
  t.y.resize(n + 1);
  t.force_x.resize(n + 1);
  t.force_y.resize(n + 1);
  t.output_x.resize(n);
  t.output_y.resize(n);
  auto z = draw_initial(model, init, rng);
  auto record = [&](std::size_t k) {
    t.times[k] = static_cast<double>(k) * config.dt;
    t.x[k] = z(LangevinModel::kX);
    t.y[k] = z(LangevinModel::kY);
    t.force_x[k] = z(LangevinModel::kForceX);
    t.force_y[k] = z(LangevinModel::kForceY);
  };
  record(0);
  const double root = model.sqrt_kappa_m();
  for (std::size_t k = 1; k <= n; ++k) {
    model.step(z, rng);
    record(k);
    t.output_x[k - 1] = (z(LangevinModel::kInX) - root * z(LangevinModel::kIntX)) / config.dt;
    t.output_y[k - 1] = (z(LangevinModel::kInY) - root * z(LangevinModel::kIntY)) / config.dt;
  }
  return t;
}

// Time average of the measurement-port x output over one trajectory.
double mean_output_x(const LangevinModel& model, const SimulationConfig& config, std::size_t index) {
  NormalStream rng(config.seed, index);
  auto z = draw_initial(model, InitialCondition::stationary(), rng);
  double in_sum = 0.0;
  double int_sum = 0.0;
  for (std::size_t k = 0; k < config.n_steps; ++k) {
    model.step(z, rng);
    in_sum += z(LangevinModel::kInX);
    int_sum += z(LangevinModel::kIntX);
  }
  return (in_sum - model.sqrt_kappa_m() * int_sum) / config.duration();
}

struct Moments {
  double mean;
  double variance;
  double se_variance;
};

Moments sample_moments(const std::vector<double>& v) {
  const auto n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double m2 = 0.0;
  double m4 = 0.0;
  for (double x : v) {
    const double d2 = (x - mean) * (x - mean);
    m2 += d2;
    m4 += d2 * d2;
  }
  const double var = m2 / (n - 1.0);
  const double pop2 = m2 / n;
  return {mean, var, std::sqrt(std::max(0.0, m4 / n - pop2 * pop2) / n)};
}

}  // namespace

Trajectory integrate_one(const SimulationConfig& config, std::size_t index, const InitialCondition& init) {
  const LangevinModel model(config);
  return run_trajectory(model, config, index, init);
}

Trajectory integrate_one(const LangevinModel& model, const SimulationConfig& config, std::size_t index,
                         const InitialCondition& init) {
  return run_trajectory(model, config, index, init);
}

std::vector<Trajectory> integrate(const SimulationConfig& config, const InitialCondition& init) {
  const LangevinModel model(config);
  std::vector<Trajectory> out(config.n_trajectories);
  detail::parallel_for(out.size(), [&](std::size_t i) { out[i] = run_trajectory(model, config, i, init); });
  return out;
}

GaussianSampler::GaussianSampler(const GaussianState& state)
    : mean_(state.mean()), factor_(psd_factor(state.cov())) {}

Eigen::VectorXd GaussianSampler::operator()(NormalStream& rng) const {
  Eigen::VectorXd xi(mean_.size());
  for (Eigen::Index i = 0; i < xi.size(); ++i) xi(i) = rng.normal();
  return mean_ + factor_ * xi;
}

ForceVarianceEstimate estimate_force_variance(const SimulationConfig& config, Protocol protocol) {
  config.validate();
  if (config.n_trajectories < kMinForceTrajectories) {
    throw std::invalid_argument("estimate_force_variance needs at least 100 trajectories");
  }
  const double t_s = config.duration();
  const ForceSignal signal = config.signal.value_or(ForceSignal{});
  const double f_x = signal.f0 * std::cos(signal.phi);
  const double f_y = signal.f0 * std::sin(signal.phi);
  const double gain = config.cfg.gain.flat_value();
  std::vector<double> estimates(config.n_trajectories);
  double expected = 0.0;

  switch (protocol) {
    case Protocol::Csl:
    case Protocol::Squeezed: {
      const double g = protocol == Protocol::Csl ? 1.0 : gain;
      const auto state = displace(squeeze_single(vacuum(1), 0, r_from_gain(g)), 0, f_y * t_s, 0.0);
      const GaussianSampler sampler(state);
      for (std::size_t i = 0; i < estimates.size(); ++i) {
        NormalStream rng(config.seed, i);
        estimates[i] = sampler(rng)(0) / t_s;
      }
      expected = squeezed_variance(g, t_s);
      break;
    }
    case Protocol::TwoModeFy:
    case Protocol::TwoModeFx: {
      const double r = r_from_gain(gain);
      const auto state = displace(squeeze_two_mode(vacuum(2), 0, 1, r), 0, f_y * t_s, -f_x * t_s);
      const GaussianSampler sampler(state);
      for (std::size_t i = 0; i < estimates.size(); ++i) {
        NormalStream rng(config.seed, i);
        const auto z = sampler(rng);
        estimates[i] = protocol == Protocol::TwoModeFy ? (z(0) - z(2)) / t_s : -(z(1) + z(3)) / t_s;
      }
      const auto v = two_mode_variances(r, t_s);
      expected = protocol == Protocol::TwoModeFy ? v.var_fy : v.var_fx;
      break;
    }
    case Protocol::Dissipative: {
      if (config.signal && (!signal.coherent() || signal.delta != 0.0)) {
        throw std::invalid_argument("dissipative protocol needs a constant resonant force (delta = 0, tau0 = inf)");
      }
      const LangevinModel model(config);
      const double kappa = config.params.kappa();
      const double gain_to_force = -kappa / (2.0 * model.sqrt_kappa_m());
      detail::parallel_for(estimates.size(), [&](std::size_t i) {
        estimates[i] = gain_to_force * mean_output_x(model, config, i);
      });
      ReceiverConfig null_cfg = config.cfg;
      null_cfg.axion = AxionLineshape::none();
      const double s0 = output_spectrum(0.0, config.params, null_cfg);
      expected = gain_to_force * gain_to_force * s0 / t_s;
      break;
    }
  }
  const auto m = sample_moments(estimates);
  return {m.mean, m.variance, m.se_variance, expected, estimates.size(), t_s};
}

}  // namespace axsq
