#pragma once

#include <cmath>
#include <functional>

namespace axsq {

struct LineMaximum {
  double x;
  double value;
  int iterations;
};

/// Golden-section search for the maximum of a unimodal function on [lo, hi].
/// Stops once the bracket is narrower than abs_tol.
inline LineMaximum golden_section_maximize(const std::function<double(double)>& f, double lo, double hi,
                                           double abs_tol, int max_iterations = 500) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = f(c);
  double fd = f(d);
  int it = 0;
  for (; it < max_iterations && (hi - lo) > abs_tol; ++it) {
    if (fc > fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = f(d);
    }
  }
  const double x = 0.5 * (lo + hi);
  return {x, f(x), it};
}

}  // namespace axsq
