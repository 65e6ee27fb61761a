#include "axsq/phasespace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "axsq/errors.hpp"

namespace axsq {
namespace {

constexpr double kSymmetryTolerance = 1e-12;
constexpr double kUncertaintyTolerance = 1e-9;
constexpr double kRoundingAllowance = 64.0;

void check_mode(const GaussianState& state, int mode) {
  if (mode < 0 || mode >= state.n_modes()) {
    throw std::out_of_range("mode index " + std::to_string(mode) + " outside [0, " +
                            std::to_string(state.n_modes()) + ")");
  }
}

void check_squeeze(double r) {
  if (!std::isfinite(r) || std::abs(r) > kMaxSqueezeParameter) {
    throw std::invalid_argument("squeeze parameter must be finite with |r| <= 15");
  }
}

}  // namespace

double gain_from_r(double r) { return std::exp(2.0 * r); }

double r_from_gain(double gain) {
  if (!(gain > 0.0)) throw std::invalid_argument("gain must be positive");
  return 0.5 * std::log(gain);
}

GaussianState::GaussianState(Eigen::VectorXd mean, Eigen::MatrixXd cov)
    : mean_(std::move(mean)), cov_(std::move(cov)) {
  validate(false);
}

GaussianState::GaussianState(Derived, Eigen::VectorXd mean, Eigen::MatrixXd cov)
    : mean_(std::move(mean)), cov_(std::move(cov)) {
  validate(true);
}

void GaussianState::validate(bool derived) {
  const auto dim = mean_.size();
  if (dim == 0 || dim % 2 != 0) {
    throw std::invalid_argument("mean must have even, nonzero length");
  }
  if (cov_.rows() != dim || cov_.cols() != dim) {
    throw std::invalid_argument("covariance shape does not match mean");
  }
  if (!mean_.allFinite() || !cov_.allFinite()) {
    throw std::invalid_argument("state contains non-finite entries");
  }
  const double scale = std::max(1.0, cov_.cwiseAbs().maxCoeff());
  if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance * scale) {
    throw std::invalid_argument("covariance is not symmetric");
  }
  cov_ = 0.5 * (cov_ + cov_.transpose());
  double tolerance = kUncertaintyTolerance;
  if (derived) {
    // Each S cov S^T perturbs the small-eigenvalue directions by about
    // eps * cond relative to their size.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov_, Eigen::EigenvaluesOnly);
    const auto& lambda = eig.eigenvalues();
    if (lambda.minCoeff() > 0.0) {
      const double cond = lambda.maxCoeff() / lambda.minCoeff();
      tolerance = std::max(tolerance, kRoundingAllowance * std::numeric_limits<double>::epsilon() * cond);
    }
  }
  const Eigen::VectorXd nu = symplectic_eigenvalues(cov_);
  if (nu.minCoeff() < 0.5 - tolerance) {
    throw std::invalid_argument("covariance violates the uncertainty principle (symplectic eigenvalue " +
                                std::to_string(nu.minCoeff()) + " < 1/2)");
  }
}

GaussianState GaussianState::vacuum(int n_modes) {
  if (n_modes < 1) throw std::invalid_argument("n_modes must be >= 1");
  const int dim = 2 * n_modes;
  return GaussianState(Eigen::VectorXd::Zero(dim), 0.5 * Eigen::MatrixXd::Identity(dim, dim));
}

GaussianState vacuum(int n_modes) { return GaussianState::vacuum(n_modes); }

Eigen::MatrixXd symplectic_form(int n_modes) {
  const int dim = 2 * n_modes;
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(dim, dim);
  for (int k = 0; k < n_modes; ++k) {
    omega(2 * k, 2 * k + 1) = 1.0;
    omega(2 * k + 1, 2 * k) = -1.0;
  }
  return omega;
}

Eigen::VectorXd symplectic_eigenvalues(const Eigen::MatrixXd& cov) {
  const auto dim = cov.rows();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> cov_eig(cov);
  if (cov_eig.eigenvalues().minCoeff() <= 0.0) {
    // Not positive definite: cannot be a physical state.
    return Eigen::VectorXd::Constant(dim / 2, cov_eig.eigenvalues().minCoeff());
  }
  // sqrt(cov) * Omega * sqrt(cov) is antisymmetric with eigenvalues +-i nu.
  const Eigen::MatrixXd root = cov_eig.operatorSqrt();
  const Eigen::MatrixXd antisym = root * symplectic_form(static_cast<int>(dim / 2)) * root;
  const Eigen::MatrixXcd hermitian = std::complex<double>(0.0, 1.0) * antisym.cast<std::complex<double>>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(hermitian, Eigen::EigenvaluesOnly);
  // Ascending: the upper half are the positive members of the pairs.
  return eig.eigenvalues().tail(dim / 2);
}

GaussianState apply_symplectic(const GaussianState& state, const Eigen::MatrixXd& transform) {
  return GaussianState(GaussianState::Derived{}, transform * state.mean(),
                       transform * state.cov() * transform.transpose());
}

Eigen::MatrixXd single_mode_squeeze_matrix(int n_modes, int mode, double r) {
  check_squeeze(r);
  Eigen::MatrixXd s = Eigen::MatrixXd::Identity(2 * n_modes, 2 * n_modes);
  s(2 * mode, 2 * mode) = std::exp(-r);
  s(2 * mode + 1, 2 * mode + 1) = std::exp(r);
  return s;
}

Eigen::MatrixXd two_mode_squeeze_matrix(int n_modes, int mode_a, int mode_b, double r) {
  check_squeeze(r);
  const double c = std::cosh(r);
  const double sh = std::sinh(r);
  Eigen::MatrixXd s = Eigen::MatrixXd::Identity(2 * n_modes, 2 * n_modes);
  const int xa = 2 * mode_a, ya = xa + 1, xb = 2 * mode_b, yb = xb + 1;
  s(xa, xa) = c;
  s(xa, xb) = sh;
  s(xb, xa) = sh;
  s(xb, xb) = c;
  s(ya, ya) = c;
  s(ya, yb) = -sh;
  s(yb, ya) = -sh;
  s(yb, yb) = c;
  return s;
}

GaussianState displace(const GaussianState& state, int mode, double dx, double dy) {
  check_mode(state, mode);
  if (!std::isfinite(dx) || !std::isfinite(dy)) throw std::invalid_argument("displacement must be finite");
  Eigen::VectorXd mean = state.mean();
  mean(2 * mode) += dx;
  mean(2 * mode + 1) += dy;
  return GaussianState(GaussianState::Derived{}, std::move(mean), state.cov());
}

GaussianState squeeze_single(const GaussianState& state, int mode, double r) {
  check_mode(state, mode);
  return apply_symplectic(state, single_mode_squeeze_matrix(state.n_modes(), mode, r));
}

GaussianState squeeze_two_mode(const GaussianState& state, int mode_a, int mode_b, double r) {
  check_mode(state, mode_a);
  check_mode(state, mode_b);
  if (mode_a == mode_b) throw std::invalid_argument("two-mode squeezing needs distinct modes");
  return apply_symplectic(state, two_mode_squeeze_matrix(state.n_modes(), mode_a, mode_b, r));
}

GaussianState loss_channel(const GaussianState& state, int mode, double eta, double n_thermal) {
  check_mode(state, mode);
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("eta must lie in [0, 1]");
  if (!(n_thermal >= 0.0) || !std::isfinite(n_thermal)) {
    throw std::invalid_argument("n_thermal must be finite and >= 0");
  }
  const int dim = 2 * state.n_modes();
  const double t = std::sqrt(eta);
  Eigen::VectorXd scale = Eigen::VectorXd::Ones(dim);
  scale(2 * mode) = t;
  scale(2 * mode + 1) = t;
  Eigen::VectorXd mean = scale.asDiagonal() * state.mean();
  Eigen::MatrixXd cov = scale.asDiagonal() * state.cov() * scale.asDiagonal();
  const double env = (1.0 - eta) * (n_thermal + 0.5);
  cov(2 * mode, 2 * mode) += env;
  cov(2 * mode + 1, 2 * mode + 1) += env;
  return GaussianState(GaussianState::Derived{}, std::move(mean), std::move(cov));
}

QuadratureStats measure_quadrature_stats(const GaussianState& state, int mode, Quadrature which) {
  check_mode(state, mode);
  const int idx = 2 * mode + (which == Quadrature::X ? 0 : 1);
  return {state.mean()(idx), state.cov()(idx, idx)};
}

HeterodyneStats measure_both_quadratures_stats(const GaussianState& state, int mode) {
  const auto x = measure_quadrature_stats(state, mode, Quadrature::X);
  const auto y = measure_quadrature_stats(state, mode, Quadrature::Y);
  return {x.mean, y.mean, x.variance + 0.5, y.variance + 0.5};
}

double linear_combination_variance(const GaussianState& state, const Eigen::VectorXd& coeffs) {
  if (coeffs.size() != state.mean().size()) throw std::invalid_argument("coefficient length mismatch");
  return coeffs.dot(state.cov() * coeffs);
}

double wigner_eval(const GaussianState& state, const Eigen::VectorXd& point) {
  if (point.size() != state.mean().size()) throw std::invalid_argument("point length must equal 2 * n_modes");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(state.cov());
  const auto& lambda = eig.eigenvalues();
  if (lambda.minCoeff() <= 0.0 || lambda.maxCoeff() / lambda.minCoeff() > kMaxCovarianceCondition) {
    throw DegenerateStateError("covariance condition number exceeds 1e12");
  }
  const Eigen::VectorXd d = point - state.mean();
  const Eigen::VectorXd proj = eig.eigenvectors().transpose() * d;
  const double quad = (proj.array().square() / lambda.array()).sum();
  const double log_det = lambda.array().log().sum();
  const int n = state.n_modes();
  return std::exp(-0.5 * quad - 0.5 * log_det - n * std::log(2.0 * std::numbers::pi));
}

nlohmann::json to_json(const GaussianState& state) {
  const auto dim = state.mean().size();
  std::vector<double> mean(state.mean().data(), state.mean().data() + dim);
  std::vector<double> cov;
  cov.reserve(static_cast<std::size_t>(dim * dim));
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = 0; j < dim; ++j) cov.push_back(state.cov()(i, j));
  return {{"n_modes", state.n_modes()}, {"mean", mean}, {"cov", cov}};
}

GaussianState state_from_json(const nlohmann::json& j) {
  const int n = j.at("n_modes").get<int>();
  if (n < 1) throw std::invalid_argument("n_modes must be >= 1");
  const auto mean = j.at("mean").get<std::vector<double>>();
  const auto cov = j.at("cov").get<std::vector<double>>();
  const auto dim = static_cast<std::size_t>(2 * n);
  if (mean.size() != dim || cov.size() != dim * dim) {
    throw std::invalid_argument("state JSON has inconsistent sizes");
  }
  Eigen::VectorXd m = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(dim));
  Eigen::MatrixXd c = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      cov.data(), static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  return GaussianState(std::move(m), std::move(c));
}

}  // namespace axsq
