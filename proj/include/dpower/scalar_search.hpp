#pragma once

#include <cmath>
#include <utility>

namespace dpower {

/// Result of a one-dimensional maximization.
struct Extremum {
  double arg;
  double value;
};

/// Golden-section search for a maximum of `fn` on [lo, hi].
/// Stops when the bracket is narrower than rel_width * max(|lo|, |hi|).
template <typename Fn>
Extremum golden_section_max(Fn&& fn, double lo, double hi,
                            double rel_width = 1e-12, int max_iter = 400) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = fn(c);
  double fd = fn(d);
  for (int i = 0; i < max_iter; ++i) {
    const double scale = std::max(std::abs(lo), std::abs(hi));
    if (hi - lo <= rel_width * scale) break;
    if (fc > fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = fn(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = fn(d);
    }
  }
  return fc > fd ? Extremum{c, fc} : Extremum{d, fd};
}

/// Bisection for a sign change of `fn` on [lo, hi]; requires
/// fn(lo) and fn(hi) of opposite sign (or one of them zero).
/// Returns the final bracket.
template <typename Fn>
std::pair<double, double> bisect_root(Fn&& fn, double lo, double hi,
                                      double rel_width = 1e-12,
                                      int max_iter = 2000) {
  double flo = fn(lo);
  if (flo == 0.0) return {lo, lo};
  if (fn(hi) == 0.0) return {hi, hi};
  for (int i = 0; i < max_iter; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (hi - lo <= rel_width * std::max(std::abs(lo), std::abs(hi))) break;
    const double fm = fn(mid);
    if (fm == 0.0) return {mid, mid};
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return {lo, hi};
}

}  // namespace dpower
