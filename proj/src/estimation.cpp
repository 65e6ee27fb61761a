#include "axsq/estimation.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "axsq/phasespace.hpp"

namespace axsq {
namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || std::isnan(v)) throw std::invalid_argument(std::string(name) + " must be positive");
}

}  // namespace

void ForceSignal::validate() const {
  if (!(f0 >= 0.0) || !std::isfinite(f0)) throw std::invalid_argument("f0 must be finite and >= 0");
  if (!std::isfinite(phi) || !std::isfinite(delta)) throw std::invalid_argument("phi and delta must be finite");
  if (!(tau0 > 0.0)) throw std::invalid_argument("tau0 must be positive");
}

double csl_variance(double t_s) {
  require_positive(t_s, "t_s");
  return 1.0 / (2.0 * t_s * t_s);
}

double squeezed_variance(double gain, double t_s) {
  require_positive(gain, "gain");
  require_positive(t_s, "t_s");
  return 1.0 / (2.0 * gain * t_s * t_s);
}

TwoModeVariances two_mode_variances(double r, double t_s) {
  require_positive(t_s, "t_s");
  const double v = std::exp(-2.0 * r) / (t_s * t_s);
  return {v, v};
}

double steady_state_mean_x(double f_y, double kappa) {
  require_positive(kappa, "kappa");
  return 2.0 * f_y / kappa;
}

DissipativeVariance dissipative_variance(double kappa, double t_s) {
  require_positive(kappa, "kappa");
  require_positive(t_s, "t_s");
  return {kappa / (4.0 * t_s), kappa * t_s >= kDissipativeValidity};
}

double axion_autocorrelation(const ForceSignal& signal, double tau) {
  signal.validate();
  if (!(tau >= 0.0)) throw std::invalid_argument("tau must be >= 0");
  const double envelope = signal.coherent() ? 1.0 : std::exp(-tau / signal.tau0);
  return 0.5 * signal.f0 * signal.f0 * envelope * std::cos(signal.delta * tau);
}

ProtocolResult csl_protocol(double f_y, double t_s) { return squeezed_protocol(1.0, f_y, t_s); }

ProtocolResult squeezed_protocol(double gain, double f_y, double t_s) {
  require_positive(t_s, "t_s");
  const auto prepared = squeeze_single(vacuum(1), 0, r_from_gain(gain));
  // Evolution for t_s under F_Y moves X by F_Y * t_s.
  const auto evolved = displace(prepared, 0, f_y * t_s, 0.0);
  const auto stats = measure_quadrature_stats(evolved, 0, Quadrature::X);
  return {stats.mean / t_s, stats.variance / (t_s * t_s), t_s};
}

TwoModeProtocolResult two_mode_protocol(double r, double f_x, double f_y, double t_s) {
  require_positive(t_s, "t_s");
  const auto prepared = squeeze_two_mode(vacuum(2), 0, 1, r);
  // The force acts on mode 1 only: X1 += F_Y t_s, Y1 -= F_X t_s.
  const auto evolved = displace(prepared, 0, f_y * t_s, -f_x * t_s);
  Eigen::Vector4d q(1.0, 0.0, -1.0, 0.0);
  Eigen::Vector4d p(0.0, 1.0, 0.0, 1.0);
  const double q_mean = q.dot(evolved.mean());
  const double p_mean = p.dot(evolved.mean());
  const double t2 = t_s * t_s;
  return {{q_mean / t_s, linear_combination_variance(evolved, q) / t2, t_s},
          {-p_mean / t_s, linear_combination_variance(evolved, p) / t2, t_s}};
}

}  // namespace axsq
