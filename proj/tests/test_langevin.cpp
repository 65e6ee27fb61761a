#include <doctest.h>

#include <cmath>
#include <complex>
#include <initializer_list>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "axsq/langevin.hpp"
#include "mc_stats.hpp"

using namespace axsq;
using axsq::testing::sample_stats;
using axsq::testing::within_se;
using cd = std::complex<double>;

namespace {

SimulationConfig base_config(double kappa_m = 1.0, double kappa_loss = 1.0, double gain = 1.0) {
  SimulationConfig c;
  c.params = {kappa_m, kappa_loss, 0.0};
  c.cfg.gain = GainProfile(gain);
  c.dt = 0.05 / c.params.kappa();
  return c;
}

}  // namespace

TEST_CASE("deterministic step matches the analytic driven solution") {
  auto c = base_config(1.0, 0.5);
  c.params.kappa_ax = 0.1;
  c.dt = 0.05 / c.params.kappa();
  c.signal = ForceSignal{0.8, 0.3, 1.7};
  const LangevinModel model(c);
  const double a = 0.5 * c.params.kappa();
  const double h = c.dt;
  const cd z0(0.4, -0.25);
  const cd tone = std::polar(0.8, 0.3);
  const cd i(0.0, 1.0);

  LangevinModel::Vector z = LangevinModel::Vector::Zero();
  z(LangevinModel::kX) = z0.real();
  z(LangevinModel::kY) = z0.imag();
  z(LangevinModel::kForceX) = tone.real();
  z(LangevinModel::kForceY) = tone.imag();
  model.step_deterministic(z);

  // dZ/dt = -a Z - i F0 exp(i(delta t + phi)) for Z = X + iY.
  const cd pole(a, 1.7);
  const cd decay = std::exp(-a * h);
  const cd rot = std::exp(i * 1.7 * h);
  const cd zh = z0 * decay - i * tone * (rot - decay) / pole;
  const cd integral = z0 * (1.0 - decay) / a - i * tone / pole * ((rot - 1.0) / (i * 1.7) - (1.0 - decay) / a);
  CHECK(z(LangevinModel::kX) == doctest::Approx(zh.real()).epsilon(1e-12));
  CHECK(z(LangevinModel::kY) == doctest::Approx(zh.imag()).epsilon(1e-12));
  CHECK(z(LangevinModel::kForceX) == doctest::Approx((tone * rot).real()).epsilon(1e-12));
  CHECK(z(LangevinModel::kForceY) == doctest::Approx((tone * rot).imag()).epsilon(1e-12));
  CHECK(z(LangevinModel::kIntX) == doctest::Approx(integral.real()).epsilon(1e-12));
  CHECK(z(LangevinModel::kIntY) == doctest::Approx(integral.imag()).epsilon(1e-12));
  CHECK(model.transition()(LangevinModel::kX, LangevinModel::kX) == doctest::Approx(std::exp(-a * h)).epsilon(1e-14));
}

TEST_CASE("step covariance matches the scalar OU increments") {
  auto c = base_config(2.0, 1.0, 3.0);
  c.params.kappa_ax = 0.2;
  c.dt = 0.05 / c.params.kappa();
  c.cfg.n_thermal = 0.2;
  const LangevinModel model(c);
  const double a = 0.5 * c.params.kappa();
  const double h = c.dt;
  const double s = 0.7;
  const double sx = s / 3.0;
  const double sy = s * 3.0;
  const double dx = 2.0 * sx + 1.0 * s + 0.2 * 0.5;
  const double dy = 2.0 * sy + 1.0 * s + 0.2 * 0.5;
  const auto& q = model.step_covariance();
  using M = LangevinModel;
  CHECK(q(M::kX, M::kX) == doctest::Approx(dx * -std::expm1(-2.0 * a * h) / (2.0 * a)).epsilon(1e-12));
  CHECK(q(M::kY, M::kY) == doctest::Approx(dy * -std::expm1(-2.0 * a * h) / (2.0 * a)).epsilon(1e-12));
  CHECK(q(M::kInX, M::kInX) == doctest::Approx(sx * h).epsilon(1e-12));
  CHECK(q(M::kInY, M::kInY) == doctest::Approx(sy * h).epsilon(1e-12));
  CHECK(q(M::kX, M::kInX) == doctest::Approx(std::sqrt(2.0) * sx * -std::expm1(-a * h) / a).epsilon(1e-12));
  CHECK(std::abs(q(M::kX, M::kY)) < 1e-16);
  CHECK(std::abs(q(M::kForceX, M::kForceX)) < 1e-16);
}

TEST_CASE("config validation") {
  auto c = base_config();
  CHECK_NOTHROW(c.validate());
  auto big = c;
  big.dt = 0.1;
  CHECK_THROWS_AS(big.validate(), std::invalid_argument);
  auto inf = c;
  inf.cfg.gain = GainProfile(std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(inf.validate(), std::invalid_argument);
  auto zero = c;
  zero.n_steps = 0;
  CHECK_THROWS_AS(zero.validate(), std::invalid_argument);
  auto bad_signal = c;
  bad_signal.signal = ForceSignal{1.0, 0.0, 0.0, 0.0};
  CHECK_THROWS_AS(bad_signal.validate(), std::invalid_argument);
  c.n_steps = static_cast<std::size_t>(std::ceil(20.0 / c.params.kappa() / c.dt));
  CHECK(c.long_enough_for_steady_state());
  c.n_steps -= 2;
  CHECK_FALSE(c.long_enough_for_steady_state());
}

TEST_CASE("seed determinism and thread independence") {
  auto c = base_config(3.0, 1.0, 4.0);
  c.signal = ForceSignal{0.5, 0.1, 0.4, 20.0};
  c.n_steps = 300;
  c.n_trajectories = 4;
  c.seed = 99;
  const auto a = integrate(c);
  const auto b = integrate(c);
  const auto single = integrate_one(c, 2);
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].x == b[k].x);
    CHECK(a[k].output_x == b[k].output_x);
    CHECK(a[k].force_y == b[k].force_y);
  }
  CHECK(single.x == a[2].x);
  CHECK(single.output_y == a[2].output_y);
  CHECK(a[0].x != a[1].x);
  auto other = c;
  other.seed = 100;
  CHECK(integrate_one(other, 0).x != a[0].x);
}

TEST_CASE("linearity in the force") {
  auto c = base_config(2.0, 1.0, 2.0);
  c.n_steps = 500;
  c.seed = 5;
  const cd fa = std::polar(1.0, 0.3);
  const cd fb = std::polar(0.5, 2.0);
  const cd fab = fa + fb;
  auto run = [&](cd f) {
    auto local = c;
    local.signal = ForceSignal{std::abs(f), std::arg(f), 0.9};
    return integrate_one(local, 0);
  };
  c.signal.reset();
  const auto none = integrate_one(c, 0);
  const auto ta = run(fa);
  const auto tb = run(fb);
  const auto tab = run(fab);
  for (std::size_t k = 0; k < tab.x.size(); ++k) {
    REQUIRE(tab.x[k] == doctest::Approx(ta.x[k] + tb.x[k] - none.x[k]).epsilon(1e-10).scale(1.0));
    REQUIRE(tab.y[k] == doctest::Approx(ta.y[k] + tb.y[k] - none.y[k]).epsilon(1e-10).scale(1.0));
  }
  for (std::size_t k = 0; k < tab.output_x.size(); ++k) {
    REQUIRE(tab.output_x[k] ==
            doctest::Approx(ta.output_x[k] + tb.output_x[k] - none.output_x[k]).epsilon(1e-10).scale(1.0));
  }
}

TEST_CASE("steady-state variance") {
  for (double gain : {1.0, 5.0}) {
    auto c = base_config(1.0, 1.0, gain);
    c.n_steps = 400;
    c.n_trajectories = 4000;
    c.seed = 17;
    const auto trajs = integrate(c, InitialCondition::vacuum());
    std::vector<double> end_x;
    for (const auto& t : trajs) end_x.push_back(t.x.back());
    const auto st = sample_stats(end_x);
    // Fluctuation-dissipation: Var(X) = sum_j kappa_j s_j / kappa.
    const double expected = (1.0 * 0.5 / gain + 1.0 * 0.5) / 2.0;
    CHECK(within_se(st.variance, expected, st.se_variance));
    CHECK(within_se(st.mean, 0.0, st.se_mean));
  }
}

TEST_CASE("stationarity of the second half") {
  auto c = base_config(4.0, 1.0, 3.0);
  c.n_steps = 2000;
  c.n_trajectories = 2000;
  c.seed = 23;
  const auto trajs = integrate(c);
  const double expected = (4.0 * 0.5 / 3.0 + 0.5) / 5.0;
  for (std::size_t k : {1000, 1500, 2000}) {
    std::vector<double> xs;
    for (const auto& t : trajs) xs.push_back(t.x[k]);
    const auto st = sample_stats(xs);
    CHECK(within_se(st.variance, expected, st.se_variance));
    CHECK(within_se(st.mean, 0.0, st.se_mean));
  }
}

TEST_CASE("constant resonant force displaces X by 2 F_Y / kappa") {
  auto c = base_config(1.0, 1.0);
  c.signal = ForceSignal{0.5, std::numbers::pi / 2.0, 0.0};
  c.n_steps = 2000;
  c.n_trajectories = 200;
  c.seed = 3;
  const auto trajs = integrate(c, InitialCondition::vacuum());
  std::vector<double> averages;
  for (const auto& t : trajs) {
    double sum = 0.0;
    for (std::size_t k = c.n_steps / 2; k <= c.n_steps; ++k) sum += t.x[k];
    averages.push_back(sum / static_cast<double>(c.n_steps / 2 + 1));
  }
  const auto st = sample_stats(averages);
  CHECK(within_se(st.mean, steady_state_mean_x(0.5, 2.0), st.se_mean));
}

TEST_CASE("squeezed initial state relaxes exponentially") {
  auto c = base_config(1.0, 1.0);
  c.n_steps = 80;
  c.n_trajectories = 4000;
  c.seed = 41;
  const auto init = squeeze_single(vacuum(1), 0, 0.8);
  const double v0 = init.cov()(0, 0);
  const auto trajs = integrate(c, InitialCondition::from_state(init));
  for (std::size_t k : {0, 5, 10, 20, 40}) {
    std::vector<double> xs;
    for (const auto& t : trajs) xs.push_back(t.x[k]);
    const auto st = sample_stats(xs);
    const double t = static_cast<double>(k) * c.dt;
    const double expected = 0.5 + (v0 - 0.5) * std::exp(-2.0 * t);
    CHECK(within_se(st.variance, expected, st.se_variance));
  }
}

TEST_CASE("generated force statistics") {
  NormalStream rng(0, 0);
  std::vector<double> times(50);
  for (std::size_t k = 0; k < times.size(); ++k) times[k] = 0.1 * static_cast<double>(k);
  const auto [fx, fy] = generate_force(ForceSignal{2.0, 0.0, 0.0}, times, rng);
  for (std::size_t k = 0; k < times.size(); ++k) {
    CHECK(fx[k] == 2.0);
    CHECK(fy[k] == 0.0);
  }

  // Finite coherence: 1e4 tau0 of data, standard errors from 100 batches.
  const double tau0 = 1.0;
  const double dt = 0.05;
  const std::size_t n = static_cast<std::size_t>(1e4 * tau0 / dt);
  std::vector<double> ts(n);
  for (std::size_t k = 0; k < n; ++k) ts[k] = dt * static_cast<double>(k);
  NormalStream rng2(7, 0);
  const auto [gx, gy] = generate_force(ForceSignal{1.0, 0.0, 0.0, tau0}, ts, rng2);
  const std::size_t lag = static_cast<std::size_t>(tau0 / dt);
  const std::size_t batches = 100;
  const std::size_t per = n / batches;
  std::vector<double> c0;
  std::vector<double> c1;
  for (std::size_t b = 0; b < batches; ++b) {
    double s0 = 0.0;
    double s1 = 0.0;
    const std::size_t lo = b * per;
    const std::size_t hi = std::min(lo + per, n - lag);
    for (std::size_t k = lo; k < hi; ++k) {
      s0 += gy[k] * gy[k];
      s1 += gy[k] * gy[k + lag];
    }
    c0.push_back(s0 / static_cast<double>(hi - lo));
    c1.push_back(s1 / static_cast<double>(hi - lo));
  }
  const auto st0 = sample_stats(c0);
  CHECK(within_se(st0.mean, 0.5, st0.se_mean));
  // Ratio of pooled autocovariances with a delete-one jackknife error.
  const double sum0 = std::accumulate(c0.begin(), c0.end(), 0.0);
  const double sum1 = std::accumulate(c1.begin(), c1.end(), 0.0);
  const double ratio = sum1 / sum0;
  double jk = 0.0;
  for (std::size_t b = 0; b < batches; ++b) {
    const double r = (sum1 - c1[b]) / (sum0 - c0[b]);
    jk += (r - ratio) * (r - ratio);
  }
  const double se_ratio = std::sqrt(jk * static_cast<double>(batches - 1) / static_cast<double>(batches));
  CHECK(within_se(ratio, std::exp(-1.0), se_ratio));
  CHECK_THROWS_AS(generate_force(ForceSignal{1.0, 0.0, 0.0, -2.0}, ts, rng2), std::invalid_argument);
}

TEST_CASE("gaussian sampler reproduces the covariance") {
  const auto state = squeeze_two_mode(displace(vacuum(2), 1, 1.0, -2.0), 0, 1, 0.6);
  const GaussianSampler sampler(state);
  NormalStream rng(3, 3);
  const int n = 50000;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(4);
  Eigen::MatrixXd outer = Eigen::MatrixXd::Zero(4, 4);
  for (int i = 0; i < n; ++i) {
    const auto z = sampler(rng);
    sum += z;
    outer += z * z.transpose();
  }
  const Eigen::VectorXd mean = sum / n;
  const Eigen::MatrixXd cov = outer / n - mean * mean.transpose();
  CHECK((mean - state.mean()).cwiseAbs().maxCoeff() < 0.05);
  CHECK((cov - state.cov()).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("force-estimator variances") {
  auto c = base_config(1.0, 1.0, 10.0);
  c.signal = ForceSignal{0.3, 1.1, 0.0};
  c.n_steps = 100;
  c.n_trajectories = 10000;
  c.seed = 8;
  for (Protocol p : {Protocol::Csl, Protocol::Squeezed, Protocol::TwoModeFy, Protocol::TwoModeFx}) {
    const auto est = estimate_force_variance(c, p);
    CHECK(within_se(est.variance, est.expected, est.standard_error));
  }
  const auto csl = estimate_force_variance(c, Protocol::Csl);
  CHECK(csl.expected == doctest::Approx(csl_variance(csl.t_s)));
  CHECK(within_se(csl.estimator_mean, 0.3 * std::sin(1.1), std::sqrt(csl.variance / 10000.0)));

  auto diss = base_config(1.0, 1.0);
  diss.dt = 0.025;
  diss.n_steps = 2000;
  diss.n_trajectories = 1000;
  diss.seed = 12;
  const auto d = estimate_force_variance(diss, Protocol::Dissipative);
  CHECK(d.t_s == doctest::Approx(50.0));
  CHECK(d.expected == doctest::Approx(dissipative_variance(2.0, 50.0).value).epsilon(1e-12));
  CHECK(within_se(d.variance, d.expected, d.standard_error));

  auto few = c;
  few.n_trajectories = 99;
  CHECK_THROWS_AS(estimate_force_variance(few, Protocol::Csl), std::invalid_argument);
}
