#pragma once

// Gaussian-state algebra in quadrature phase space.
//
// Conventions used throughout the library:
//   * Quadratures are ordered (X1, Y1, X2, Y2, ...).
//   * Vacuum variance is 1/2 per quadrature, so [X, Y] = i and the vacuum
//     Wigner function is exp(-(X^2 + Y^2)) / pi. Some texts use 1 instead;
//     every number in this library uses 1/2.
//   * Squeezing gain G = exp(2 r); squeezing by r scales X by exp(-r).

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace axsq {

enum class Quadrature { X, Y };

/// Largest |r| accepted by the squeezing operations.
inline constexpr double kMaxSqueezeParameter = 15.0;

/// Condition number above which a covariance is treated as degenerate.
inline constexpr double kMaxCovarianceCondition = 1e12;

double gain_from_r(double r);
double r_from_gain(double gain);

/// N-mode Gaussian state: mean quadrature vector and covariance matrix.
///
/// Construction validates shape, finiteness, symmetry and the uncertainty
/// principle; every public operation returns a new state.
class GaussianState {
 public:
  GaussianState(Eigen::VectorXd mean, Eigen::MatrixXd cov);

  static GaussianState vacuum(int n_modes);

  int n_modes() const { return static_cast<int>(mean_.size() / 2); }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& cov() const { return cov_; }

 private:
  // Result of a physical operation on a valid state. The uncertainty check
  // allows for rounding that grows with the condition number.
  struct Derived {};
  GaussianState(Derived, Eigen::VectorXd mean, Eigen::MatrixXd cov);
  void validate(bool derived);

  friend GaussianState apply_symplectic(const GaussianState&, const Eigen::MatrixXd&);
  friend GaussianState displace(const GaussianState&, int, double, double);
  friend GaussianState loss_channel(const GaussianState&, int, double, double);

  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
};

GaussianState vacuum(int n_modes);

/// Block-diagonal 2N x 2N matrix with blocks [[0, 1], [-1, 0]].
Eigen::MatrixXd symplectic_form(int n_modes);

/// Symplectic eigenvalues of a covariance matrix, ascending.
Eigen::VectorXd symplectic_eigenvalues(const Eigen::MatrixXd& cov);

/// Applies mean -> S mean, cov -> S cov S^T.
GaussianState apply_symplectic(const GaussianState& state, const Eigen::MatrixXd& transform);

Eigen::MatrixXd single_mode_squeeze_matrix(int n_modes, int mode, double r);
Eigen::MatrixXd two_mode_squeeze_matrix(int n_modes, int mode_a, int mode_b, double r);

GaussianState displace(const GaussianState& state, int mode, double dx, double dy);
GaussianState squeeze_single(const GaussianState& state, int mode, double r);

/// Squeezes Q = X_a - X_b and P = Y_a + Y_b by exp(-r); R = X_a + X_b and
/// S = Y_a - Y_b are anti-squeezed by exp(+r).
GaussianState squeeze_two_mode(const GaussianState& state, int mode_a, int mode_b, double r);

/// Beam-splitter loss: eta is the retained power fraction, the environment
/// is thermal with occupation n_thermal.
GaussianState loss_channel(const GaussianState& state, int mode, double eta, double n_thermal);

struct QuadratureStats {
  double mean;
  double variance;
};

/// Marginal statistics of an ideal homodyne measurement of one quadrature.
QuadratureStats measure_quadrature_stats(const GaussianState& state, int mode, Quadrature which);

struct HeterodyneStats {
  double mean_x;
  double mean_y;
  double var_x;
  double var_y;
};

/// Marginal statistics of a quantum-limited simultaneous measurement of both
/// quadratures; each variance carries an extra 1/2.
HeterodyneStats measure_both_quadratures_stats(const GaussianState& state, int mode);

/// Variance of the linear combination c . z under the state.
double linear_combination_variance(const GaussianState& state, const Eigen::VectorXd& coeffs);

/// Value of the Wigner function at a phase-space point.
double wigner_eval(const GaussianState& state, const Eigen::VectorXd& point);

nlohmann::json to_json(const GaussianState& state);
GaussianState state_from_json(const nlohmann::json& j);

}  // namespace axsq
