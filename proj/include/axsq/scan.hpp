#pragma once

// Scan-rate figure of merit for a tunable haloscope receiver.

#include <numbers>

#include "axsq/cavity.hpp"

namespace axsq {

/// Averaging-time constant for which B / t_av reproduces the closed-form
/// scan rate exactly: the closed form carries a prefactor 2 where the
/// bandwidth integral contributes pi/4, so t_av = (pi/8) / (sigma(0)^2 delta_a).
inline constexpr double kClosedFormTavConstant = std::numbers::pi / 8.0;

struct ScanConfig {
  CavityParams params;
  ReceiverConfig cfg;
  double delta_a = 1e-6;
  double t_av_constant = 1.0;

  void validate() const;
};

struct ScanOptimum {
  double kappa_m_opt;
  double gain_opt;
  double rate_opt;
  double advantage;
};

/// t_av_constant / (sigma(0)^2 delta_a).
double averaging_time(const ScanConfig& cfg);

/// Integral over omega in [0, inf) of sigma(omega)^2 / sigma(0)^2.
double bandwidth(const ScanConfig& cfg);

/// Closed-form R(G, kappa_m) for the small-kappa_ax receiver.
double scan_rate_closed_form(double gain, double kappa_m, const ScanConfig& cfg);

/// B / t_av from the numerical bandwidth and the full sensitivity.
double scan_rate_numeric(double gain, double kappa_m, const ScanConfig& cfg);

/// Maximizes the closed-form rate over kappa_m at fixed gain.
/// A 200-point log grid over [1e-2, 1e4 G] kappa_loss must show a single
/// interior maximum; golden-section search then refines it.
ScanOptimum optimize_kappa_m(double gain, const ScanConfig& cfg);

/// Joint maximization over gain in [gain_min, gain_max] and kappa_m.
ScanOptimum optimize_joint(double gain_min, double gain_max, const ScanConfig& cfg);

/// Ratio of the kappa_m-optimized rate at `gain` to the one at G = 1.
double quantum_advantage(double gain, const ScanConfig& cfg);

}  // namespace axsq
