#pragma once

#include <cmath>
#include <random>

#include "axsq/phasespace.hpp"

namespace axsq::testing {

inline bool close_rel(double a, double b, double rel) { return std::abs(a - b) <= rel * std::abs(b); }

// Random sequence of Gaussian operations on an n-mode state, drawn from a
// std::mt19937_64 so the sequence is independent of the library RNG.
// Each squeeze draws |r| <= r_max.
inline GaussianState random_state(std::mt19937_64& gen, int n_modes, int n_ops, double r_max = 1.0) {
  std::uniform_int_distribution<int> op_dist(0, 3);
  std::uniform_int_distribution<int> mode_dist(0, n_modes - 1);
  std::uniform_real_distribution<double> r_dist(-r_max, r_max);
  std::uniform_real_distribution<double> d_dist(-3.0, 3.0);
  std::uniform_real_distribution<double> eta_dist(0.0, 1.0);
  std::uniform_real_distribution<double> n_dist(0.0, 2.0);
  GaussianState s = vacuum(n_modes);
  for (int k = 0; k < n_ops; ++k) {
    const int a = mode_dist(gen);
    switch (op_dist(gen)) {
      case 0: {
        const double dx = d_dist(gen);
        const double dy = d_dist(gen);
        s = displace(s, a, dx, dy);
        break;
      }
      case 1:
        s = squeeze_single(s, a, r_dist(gen));
        break;
      case 2:
        if (n_modes > 1) {
          int b = mode_dist(gen);
          if (b == a) b = (a + 1) % n_modes;
          s = squeeze_two_mode(s, a, b, r_dist(gen));
        }
        break;
      default: {
        const double eta = eta_dist(gen);
        const double n_t = n_dist(gen);
        s = loss_channel(s, a, eta, n_t);
        break;
      }
    }
  }
  return s;
}

}  // namespace axsq::testing
