#pragma once

// Frequency-domain input-output model of a cavity with three ports:
// measurement (m), internal loss (loss) and axion (ax), in that order.
// All rates and Fourier frequencies are in units of kappa_loss unless a
// caller chooses otherwise; nothing here depends on the unit choice.

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace axsq {

struct CavityParams {
  double kappa_m = 1.0;
  double kappa_loss = 1.0;
  double kappa_ax = 0.0;

  double kappa() const { return kappa_m + kappa_loss + kappa_ax; }
  void validate() const;
  /// kappa_ax << kappa_loss ~ kappa_m, taken as kappa_ax < 1e-3 * min(kappa_m, kappa_loss).
  bool physically_accessible() const;
};

/// Squeezer gain G(omega): flat by default, or a tabulated profile that is
/// linearly interpolated and held constant beyond its end points.
/// An infinite flat gain is allowed and models ideal squeezing.
class GainProfile {
 public:
  GainProfile(double flat = 1.0);  // NOLINT(google-explicit-constructor)
  GainProfile(std::vector<double> omegas, std::vector<double> gains);

  double operator()(double omega) const;
  bool is_flat() const { return omegas_.empty(); }
  double flat_value() const { return flat_; }
  const std::vector<double>& omegas() const { return omegas_; }
  const std::vector<double>& gains() const { return gains_; }

 private:
  double flat_ = 1.0;
  std::vector<double> omegas_;
  std::vector<double> gains_;
};

/// Axion number spectral density n_ax(omega).
///   None       -- no axion, n_ax = 0.
///   Flat       -- delta-like: n_ax = peak at whichever omega is evaluated;
///                 used when sigma(omega) is read as "sensitivity to an
///                 axion at detuning omega".
///   Lorentzian -- peak * (width/2)^2 / ((omega - center)^2 + (width/2)^2),
///                 width being the full width at half maximum.
struct AxionLineshape {
  enum class Kind { None, Flat, Lorentzian };
  Kind kind = Kind::None;
  double peak = 0.0;
  double center = 0.0;
  double width = 0.0;

  static AxionLineshape none() { return {}; }
  static AxionLineshape flat(double n_ax) { return {Kind::Flat, n_ax, 0.0, 0.0}; }
  static AxionLineshape lorentzian(double center, double width, double peak) {
    return {Kind::Lorentzian, peak, center, width};
  }

  double density(double omega) const;
  void validate() const;
};

struct ReceiverConfig {
  GainProfile gain{1.0};
  double n_thermal = 0.0;
  AxionLineshape axion{};

  void validate() const;
};

struct SpectrumGrid {
  std::vector<double> omegas;
  std::vector<double> values;
};

/// 3x3 scattering matrix chi_jk(omega), port order (m, loss, ax).
Eigen::Matrix3cd susceptibility(double omega, const CavityParams& params);

/// Bose-Einstein occupation at angular frequency omega_c (rad/s) and
/// temperature (K); zero at T = 0.
double thermal_occupation(double omega_c, double temperature);

/// x-quadrature noise spectral density leaving the measurement port.
double output_spectrum(double omega, const CavityParams& params, const ReceiverConfig& cfg);

/// Fractional excess of the output spectrum caused by the axion.
double sensitivity(double omega, const CavityParams& params, const ReceiverConfig& cfg);

/// Small-kappa_ax approximation of sensitivity():
/// (n_ax / (n_T + 1/2)) kappa_ax kappa_m / (kappa_m kappa_loss + beta(omega) / G).
double sensitivity_simplified(double omega, const CavityParams& params, const ReceiverConfig& cfg);

/// Positive omega at which sigma(omega) = sigma(0) / 2, by bisection.
/// Throws UnboundedBandwidthError when no crossing exists.
double sensitivity_halfwidth(const CavityParams& params, const ReceiverConfig& cfg);

SpectrumGrid output_spectrum_grid(const std::vector<double>& omegas, const CavityParams& params,
                                  const ReceiverConfig& cfg);
SpectrumGrid sensitivity_grid(const std::vector<double>& omegas, const CavityParams& params,
                              const ReceiverConfig& cfg);

}  // namespace axsq
