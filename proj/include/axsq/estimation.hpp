#pragma once

// Closed-form force-estimation variances and their deterministic
// phase-space protocol counterparts.

#include <limits>

namespace axsq {

/// Stochastic classical force F_X = F0 cos(delta t + phi), F_Y = F0 sin(delta t + phi),
/// with optional phase coherence time tau0 (infinity for a pure tone).
struct ForceSignal {
  double f0 = 0.0;
  double phi = 0.0;
  double delta = 0.0;
  double tau0 = std::numeric_limits<double>::infinity();

  void validate() const;
  bool coherent() const { return tau0 == std::numeric_limits<double>::infinity(); }
};

struct ProtocolResult {
  double estimator_mean;
  double estimator_variance;
  double t_s;
};

double csl_variance(double t_s);

/// gain < 1 (anti-squeezed input) is accepted; the result is then larger
/// than the coherent-state limit.
double squeezed_variance(double gain, double t_s);

struct TwoModeVariances {
  double var_fy;
  double var_fx;
};

TwoModeVariances two_mode_variances(double r, double t_s);

double steady_state_mean_x(double f_y, double kappa);

/// Smallest kappa * t_s for which the kappa / (4 t_s) asymptotic is flagged valid.
inline constexpr double kDissipativeValidity = 10.0;

struct DissipativeVariance {
  double value;
  bool within_validity;  // t_s >= 10 / kappa
};

DissipativeVariance dissipative_variance(double kappa, double t_s);

double axion_autocorrelation(const ForceSignal& signal, double tau);

// Deterministic covariance-level protocols: prepare, displace by force * t_s,
// read the marginal of the estimator's observable.

ProtocolResult csl_protocol(double f_y, double t_s);
ProtocolResult squeezed_protocol(double gain, double f_y, double t_s);

struct TwoModeProtocolResult {
  ProtocolResult fy;  // from Q = X1 - X2
  ProtocolResult fx;  // from P = Y1 + Y2, sign flipped
};

TwoModeProtocolResult two_mode_protocol(double r, double f_x, double f_y, double t_s);

}  // namespace axsq
