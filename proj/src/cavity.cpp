#include "axsq/cavity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "axsq/errors.hpp"

namespace axsq {
namespace {

constexpr double kHbar = 1.054571817e-34;     // J s
constexpr double kBoltzmann = 1.380649e-23;   // J / K
constexpr double kHalfwidthRelTol = 1e-13;
constexpr double kHalfwidthSearchLimit = 1e12;

double inverse_gain(const ReceiverConfig& cfg, double omega) {
  const double g = cfg.gain(omega);
  return std::isinf(g) ? 0.0 : 1.0 / g;
}

struct PortWeights {
  double mm, ml, ma;  // |chi_mj|^2
};

PortWeights measurement_row(double omega, const CavityParams& p) {
  const double half = 0.5 * p.kappa();
  const double denom = half * half + omega * omega;
  const double refl = half - p.kappa_m;
  return {(refl * refl + omega * omega) / denom, p.kappa_m * p.kappa_loss / denom,
          p.kappa_m * p.kappa_ax / denom};
}

}  // namespace

void CavityParams::validate() const {
  if (!std::isfinite(kappa_m) || !std::isfinite(kappa_loss) || !std::isfinite(kappa_ax)) {
    throw std::invalid_argument("cavity rates must be finite");
  }
  if (!(kappa_m > 0.0)) throw std::invalid_argument("kappa_m must be positive");
  if (!(kappa_loss > 0.0)) throw std::invalid_argument("kappa_loss must be positive");
  if (!(kappa_ax >= 0.0)) throw std::invalid_argument("kappa_ax must be >= 0");
}

bool CavityParams::physically_accessible() const {
  return kappa_ax < 1e-3 * std::min(kappa_m, kappa_loss);
}

GainProfile::GainProfile(double flat) : flat_(flat) {
  if (!(flat >= 1.0)) throw std::invalid_argument("squeezer gain must be >= 1");
}

GainProfile::GainProfile(std::vector<double> omegas, std::vector<double> gains)
    : omegas_(std::move(omegas)), gains_(std::move(gains)) {
  if (omegas_.empty() || omegas_.size() != gains_.size()) {
    throw std::invalid_argument("gain profile needs matching, nonempty omega and gain tables");
  }
  for (std::size_t i = 0; i < omegas_.size(); ++i) {
    if (!std::isfinite(omegas_[i])) throw std::invalid_argument("gain profile omegas must be finite");
    if (i > 0 && !(omegas_[i] > omegas_[i - 1])) {
      throw std::invalid_argument("gain profile omegas must be strictly increasing");
    }
    if (!(gains_[i] >= 1.0) || !std::isfinite(gains_[i])) {
      throw std::invalid_argument("gain profile values must be finite and >= 1");
    }
  }
  flat_ = gains_.front();
}

double GainProfile::operator()(double omega) const {
  if (omegas_.empty()) return flat_;
  if (omega <= omegas_.front()) return gains_.front();
  if (omega >= omegas_.back()) return gains_.back();
  const auto it = std::upper_bound(omegas_.begin(), omegas_.end(), omega);
  const auto i = static_cast<std::size_t>(it - omegas_.begin());
  const double t = (omega - omegas_[i - 1]) / (omegas_[i] - omegas_[i - 1]);
  return gains_[i - 1] + t * (gains_[i] - gains_[i - 1]);
}

double AxionLineshape::density(double omega) const {
  switch (kind) {
    case Kind::None:
      return 0.0;
    case Kind::Flat:
      return peak;
    case Kind::Lorentzian: {
      const double hw = 0.5 * width;
      const double d = omega - center;
      return peak * hw * hw / (d * d + hw * hw);
    }
  }
  return 0.0;
}

void AxionLineshape::validate() const {
  if (kind == Kind::None) return;
  if (!(peak >= 0.0) || !std::isfinite(peak)) throw std::invalid_argument("n_ax must be finite and >= 0");
  if (kind == Kind::Lorentzian) {
    if (!(width > 0.0) || !std::isfinite(width)) throw std::invalid_argument("axion linewidth must be positive");
    if (!std::isfinite(center)) throw std::invalid_argument("axion line center must be finite");
  }
}

void ReceiverConfig::validate() const {
  if (!(n_thermal >= 0.0) || !std::isfinite(n_thermal)) {
    throw std::invalid_argument("n_thermal must be finite and >= 0");
  }
  axion.validate();
}

Eigen::Matrix3cd susceptibility(double omega, const CavityParams& params) {
  params.validate();
  const std::complex<double> pole(0.5 * params.kappa(), omega);
  const Eigen::Vector3d root(std::sqrt(params.kappa_m), std::sqrt(params.kappa_loss), std::sqrt(params.kappa_ax));
  Eigen::Matrix3cd chi = (-(root * root.transpose())).cast<std::complex<double>>() / pole;
  chi.diagonal().array() += 1.0;
  return chi;
}

double thermal_occupation(double omega_c, double temperature) {
  if (!(omega_c > 0.0)) throw std::invalid_argument("omega_c must be positive");
  if (!(temperature >= 0.0)) throw std::invalid_argument("temperature must be >= 0");
  if (temperature == 0.0) return 0.0;
  const double x = kHbar * omega_c / (kBoltzmann * temperature);
  return 1.0 / std::expm1(x);
}

double output_spectrum(double omega, const CavityParams& params, const ReceiverConfig& cfg) {
  params.validate();
  const auto w = measurement_row(omega, params);
  const double thermal = cfg.n_thermal + 0.5;
  return w.mm * thermal * inverse_gain(cfg, omega) + w.ml * thermal + w.ma * (cfg.axion.density(omega) + 0.5);
}

double sensitivity(double omega, const CavityParams& params, const ReceiverConfig& cfg) {
  const double total = output_spectrum(omega, params, cfg);
  if (!(total > 0.0)) throw NumericalError("output spectrum vanishes; sensitivity undefined");
  const auto w = measurement_row(omega, params);
  return w.ma * cfg.axion.density(omega) / total;
}

double sensitivity_simplified(double omega, const CavityParams& params, const ReceiverConfig& cfg) {
  params.validate();
  const double diff = 0.5 * (params.kappa_m - params.kappa_loss);
  const double beta = diff * diff + omega * omega;
  const double denom = params.kappa_m * params.kappa_loss + beta * inverse_gain(cfg, omega);
  return cfg.axion.density(omega) / (cfg.n_thermal + 0.5) * params.kappa_ax * params.kappa_m / denom;
}

double sensitivity_halfwidth(const CavityParams& params, const ReceiverConfig& cfg) {
  const double target = 0.5 * sensitivity(0.0, params, cfg);
  if (!(target > 0.0)) throw std::invalid_argument("sensitivity at resonance must be positive");
  const double limit = kHalfwidthSearchLimit * params.kappa();
  double lo = 0.0;
  double hi = params.kappa();
  while (sensitivity(hi, params, cfg) > target) {
    lo = hi;
    hi *= 2.0;
    if (hi > limit) {
      throw UnboundedBandwidthError("sensitivity stays above half its peak out to 1e12 kappa");
    }
  }
  while (hi - lo > kHalfwidthRelTol * hi) {
    const double mid = 0.5 * (lo + hi);
    if (sensitivity(mid, params, cfg) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

SpectrumGrid output_spectrum_grid(const std::vector<double>& omegas, const CavityParams& params,
                                  const ReceiverConfig& cfg) {
  SpectrumGrid grid{omegas, {}};
  grid.values.reserve(omegas.size());
  for (double w : omegas) grid.values.push_back(output_spectrum(w, params, cfg));
  return grid;
}

SpectrumGrid sensitivity_grid(const std::vector<double>& omegas, const CavityParams& params,
                              const ReceiverConfig& cfg) {
  SpectrumGrid grid{omegas, {}};
  grid.values.reserve(omegas.size());
  for (double w : omegas) grid.values.push_back(sensitivity(w, params, cfg));
  return grid;
}

}  // namespace axsq
