#pragma once

// Dormand-Prince 5(4) step with error estimate and the 4th-order continuous
// extension (value and derivative).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

namespace dpower {

template <std::size_t N>
using Vec = std::array<double, N>;

namespace dp5 {
inline constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0,
                        c5 = 8.0 / 9.0;
inline constexpr double a21 = 1.0 / 5.0;
inline constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
inline constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0,
                        a43 = 32.0 / 9.0;
inline constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                        a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
inline constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0,
                        a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                        a65 = -5103.0 / 18656.0;
inline constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0,
                        a74 = 125.0 / 192.0, a75 = -2187.0 / 6784.0,
                        a76 = 11.0 / 84.0;
inline constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0,
                        e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                        e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
inline constexpr double d1 = -12715105075.0 / 11282082432.0,
                        d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0,
                        d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0,
                        d7 = 69997945.0 / 29380423.0;
}  // namespace dp5

/// Continuous extension over one accepted step [t0, t0 + h].
template <std::size_t N>
struct DenseStep {
  double t0 = 0.0;
  double h = 0.0;
  Vec<N> y0{}, r1{}, r2{}, r3{}, r4{};

  Vec<N> value(double t) const {
    const double s = (t - t0) / h;
    const double s1 = 1.0 - s;
    Vec<N> y;
    for (std::size_t i = 0; i < N; ++i) {
      y[i] = y0[i] + s * (r1[i] + s1 * (r2[i] + s * (r3[i] + s1 * r4[i])));
    }
    return y;
  }

  Vec<N> derivative(double t) const {
    const double s = (t - t0) / h;
    const double s1 = 1.0 - s;
    Vec<N> dy;
    for (std::size_t i = 0; i < N; ++i) {
      const double b = r2[i] + s * (r3[i] + s1 * r4[i]);
      const double db = r3[i] + (1.0 - 2.0 * s) * r4[i];
      const double a = r1[i] + s1 * b;
      const double da = -b + s1 * db;
      dy[i] = (a + s * da) / h;
    }
    return dy;
  }
};

template <std::size_t N>
struct StepAttempt {
  Vec<N> y1{};
  Vec<N> k7{};       ///< derivative at the new point (FSAL)
  double error = 0;  ///< scaled RMS error; accept when <= 1
  DenseStep<N> dense;
};

/// One DP5(4) step from (t, y) with derivative k1 = rhs(t, y).
template <std::size_t N, typename Rhs>
StepAttempt<N> dopri5_step(const Rhs& rhs, double t, const Vec<N>& y,
                           const Vec<N>& k1, double h, double rtol,
                           const Vec<N>& atol) {
  using namespace dp5;
  Vec<N> tmp, k2, k3, k4, k5, k6;
  for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * a21 * k1[i];
  k2 = rhs(t + c2 * h, tmp);
  for (std::size_t i = 0; i < N; ++i)
    tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
  k3 = rhs(t + c3 * h, tmp);
  for (std::size_t i = 0; i < N; ++i)
    tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
  k4 = rhs(t + c4 * h, tmp);
  for (std::size_t i = 0; i < N; ++i)
    tmp[i] =
        y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
  k5 = rhs(t + c5 * h, tmp);
  for (std::size_t i = 0; i < N; ++i)
    tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] +
                         a64 * k4[i] + a65 * k5[i]);
  k6 = rhs(t + h, tmp);

  StepAttempt<N> out;
  for (std::size_t i = 0; i < N; ++i)
    out.y1[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] +
                            a75 * k5[i] + a76 * k6[i]);
  out.k7 = rhs(t + h, out.y1);

  double err2 = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                          e6 * k6[i] + e7 * out.k7[i]);
    const double sc =
        atol[i] + rtol * std::max(std::abs(y[i]), std::abs(out.y1[i]));
    err2 += (e / sc) * (e / sc);
  }
  out.error = std::sqrt(err2 / static_cast<double>(N));

  auto& d = out.dense;
  d.t0 = t;
  d.h = h;
  d.y0 = y;
  for (std::size_t i = 0; i < N; ++i) {
    d.r1[i] = out.y1[i] - y[i];
    d.r2[i] = h * k1[i] - d.r1[i];
    d.r3[i] = d.r1[i] - h * out.k7[i] - d.r2[i];
    d.r4[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] +
                   d6 * k6[i] + d7 * out.k7[i]);
  }
  return out;
}

/// Step-size factor for the next step given the scaled error.
inline double dopri5_step_factor(double error) {
  if (error == 0.0) return 5.0;
  return std::clamp(0.9 * std::pow(error, -0.2), 0.2, 5.0);
}

}  // namespace dpower
