#pragma once

#include <cmath>
#include <utility>

namespace cvqec {

template <typename F>
double golden_section_minimize(F&& f, double lo, double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  // The bracket may have collapsed onto a boundary minimum.
  double best = 0.5 * (a + b);
  double f_best = f(best);
  for (double x : {lo, hi}) {
    const double fx = f(x);
    if (fx < f_best) {
      best = x;
      f_best = fx;
    }
  }
  return best;
}

}  // namespace cvqec
