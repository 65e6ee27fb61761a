#pragma once

#include <cmath>
#include <numeric>
#include <vector>

namespace axsq::testing {

struct SampleStats {
  double mean;
  double variance;
  double se_mean;
  double se_variance;
};

inline SampleStats sample_stats(const std::vector<double>& v) {
  const auto n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double m2 = 0.0;
  double m4 = 0.0;
  for (double x : v) {
    const double d = (x - mean) * (x - mean);
    m2 += d;
    m4 += d * d;
  }
  const double var = m2 / (n - 1.0);
  const double pop = m2 / n;
  return {mean, var, std::sqrt(var / n), std::sqrt(std::max(0.0, m4 / n - pop * pop) / n)};
}

inline bool within_se(double value, double expected, double se, double k = 3.0) {
  return std::abs(value - expected) <= k * se;
}

}  // namespace axsq::testing
