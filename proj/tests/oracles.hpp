#pragma once

// Reference computations that share no code with the library: fixed-step RK4
// shooting, brute-force sign scans, grid-plus-ternary maximization and
// closed-form special cases.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace oracle {

struct Rng {
  std::mt19937_64 gen;
  explicit Rng(std::uint64_t seed) : gen(seed) {}
  double unit() { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
  /// (p, q) with 1 < p < q <= hi.
  std::pair<double, double> exponents(double hi = 6.0) {
    for (;;) {
      const double a = uniform(1.0, hi);
      const double b = uniform(1.0, hi);
      const double p = std::min(a, b), q = std::max(a, b);
      if (p > 1.0 + 1e-6 && q > p + 1e-6) return {p, q};
    }
  }
};

// ---------------------------------------------------------------------------
// Scalar maximization

/// Maximum of a unimodal-on-the-grid function: dense log grid, then ternary
/// search between the neighbours of the best grid point.
template <typename Fn>
std::pair<double, double> maximize_log(const Fn& g, double lo, double hi,
                                       int points = 20000) {
  const double tl = std::log(lo), th = std::log(hi);
  int best = 0;
  double best_val = -INFINITY;
  for (int i = 0; i < points; ++i) {
    const double u = std::exp(tl + (th - tl) * i / (points - 1));
    const double v = g(u);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  double a = std::exp(tl + (th - tl) * std::max(best - 1, 0) / (points - 1));
  double b =
      std::exp(tl + (th - tl) * std::min(best + 1, points - 1) / (points - 1));
  for (int it = 0; it < 300; ++it) {
    const double m1 = a + (b - a) / 3.0, m2 = b - (b - a) / 3.0;
    if (g(m1) < g(m2)) {
      a = m1;
    } else {
      b = m2;
    }
  }
  const double u = 0.5 * (a + b);
  return {u, g(u)};
}

/// max over u > 0 of 2u^{p-1}/(p+1) - 2u^{q-1}/(q+1).
inline double omega_crit(double p, double q) {
  auto h = [p, q](double u) {
    return 2.0 * std::pow(u, p - 1.0) / (p + 1.0) -
           2.0 * std::pow(u, q - 1.0) / (q + 1.0);
  };
  return maximize_log(h, 1e-6, 2.0).second;
}

/// max over u > 0 of u^{p-1} - u^{q-1}.
inline double eta_crit(double p, double q) {
  auto g = [p, q](double u) {
    return std::pow(u, p - 1.0) - std::pow(u, q - 1.0);
  };
  return maximize_log(g, 1e-6, 2.0).second;
}

// ---------------------------------------------------------------------------
// Sign scans

struct Term {
  double c, e;
};

inline double eval_terms(const std::vector<Term>& ts, double u) {
  double acc = 0.0;
  for (const auto& t : ts) acc += t.c * std::pow(u, t.e);
  return acc;
}

/// Largest value over `points` log-spaced samples of [lo, hi].
inline std::pair<double, double> brute_force_max(const std::vector<Term>& ts,
                                                 int points = 1000000,
                                                 double lo = 1e-8,
                                                 double hi = 1e8) {
  const double tl = std::log(lo), th = std::log(hi);
  double best = -INFINITY, arg = lo;
  for (int i = 0; i < points; ++i) {
    const double u = std::exp(tl + (th - tl) * i / (points - 1));
    const double v = eval_terms(ts, u);
    if (v > best) {
      best = v;
      arg = u;
    }
  }
  return {best, arg};
}

// ---------------------------------------------------------------------------
// Double-power nonlinearity, written out by hand

inline double f(double omega, double p, double q, double u) {
  return -omega * u + std::pow(u, p) - std::pow(u, q);
}

inline double F(double omega, double p, double q, double u) {
  return -0.5 * omega * u * u + std::pow(u, p + 1.0) / (p + 1.0) -
         std::pow(u, q + 1.0) / (q + 1.0);
}

/// Positive roots of a u^2 + b u + c = 0, ascending.
inline std::array<double, 2> quadratic_roots(double a, double b, double c) {
  const double d = std::sqrt(b * b - 4.0 * a * c);
  // Cancellation-free pair.
  const double t = -0.5 * (b + std::copysign(d, b));
  double r1 = t / a, r2 = c / t;
  if (r1 > r2) std::swap(r1, r2);
  return {r1, r2};
}

// ---------------------------------------------------------------------------
// Fixed-step RK4 shooting

enum class Shot { Crossing, Rebound, Unresolved };

struct Rk4Shooter {
  double omega, p, q;
  int n;
  double h = 1e-3;
  double r_max = 200.0;

  std::array<double, 2> rhs(double r, const std::array<double, 2>& y) const {
    return {y[1], -(n - 1) / r * y[1] - f(omega, p, q, std::max(y[0], 0.0))};
  }

  std::array<double, 2> step(double r, const std::array<double, 2>& y,
                             double dr) const {
    auto add = [](const std::array<double, 2>& a, const std::array<double, 2>& k,
                  double s) {
      return std::array<double, 2>{a[0] + s * k[0], a[1] + s * k[1]};
    };
    const auto k1 = rhs(r, y);
    const auto k2 = rhs(r + 0.5 * dr, add(y, k1, 0.5 * dr));
    const auto k3 = rhs(r + 0.5 * dr, add(y, k2, 0.5 * dr));
    const auto k4 = rhs(r + dr, add(y, k3, dr));
    return {y[0] + dr / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
            y[1] + dr / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])};
  }

  /// Series start at r = h, then fixed RK4 steps.
  Shot classify(double alpha) const {
    const double fa = f(omega, p, q, alpha);
    std::array<double, 2> y{alpha - fa * h * h / (2.0 * n), -fa * h / n};
    bool descending = false;
    for (double r = h; r < r_max; r += h) {
      y = step(r, y, h);
      if (y[0] <= 0.0) return Shot::Crossing;
      if (descending && y[1] >= 0.0) return Shot::Rebound;
      if (y[1] < 0.0) descending = true;
    }
    return Shot::Unresolved;
  }

  /// Bisection between a Rebound height and a Crossing height.
  double ground_state(double rebound, double crossing, double rel = 1e-13) const {
    while (std::abs(crossing - rebound) > rel * crossing) {
      const double mid = 0.5 * (rebound + crossing);
      const auto s = classify(mid);
      if (s == Shot::Rebound) {
        rebound = mid;
      } else if (s == Shot::Crossing) {
        crossing = mid;
      } else {
        return mid;
      }
    }
    return 0.5 * (rebound + crossing);
  }
};

/// Largest mismatch between each sample and an RK4 integration (m substeps)
/// started from the previous sample. Samples are (r, u, u_r).
template <typename Samples>
double one_step_defect(const Rk4Shooter& s, const Samples& samples,
                       int substeps = 64) {
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < samples.size(); ++i) {
    const auto& a = samples[i];
    const auto& b = samples[i + 1];
    if (!(a.u > 0.0) || !(b.u > 0.0)) continue;
    std::array<double, 2> y{a.u, a.v};
    const double dr = (b.r - a.r) / substeps;
    double r = a.r;
    for (int k = 0; k < substeps; ++k, r += dr) y = s.step(r, y, dr);
    worst = std::max({worst, std::abs(y[0] - b.u), std::abs(y[1] - b.v)});
  }
  return worst;
}

}  // namespace oracle
