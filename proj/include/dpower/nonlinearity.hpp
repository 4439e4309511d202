#pragma once

// The double-power nonlinearity f(u) = -omega u + u^p - u^q, omega > 0,
// q > p > 1, and the expressions derived from it.

#include <cmath>
#include <string>
#include <vector>

#include "dpower/errors.hpp"
#include "dpower/power_sum.hpp"
#include "dpower/scalar_search.hpp"

namespace dpower {

/// A validated problem instance. Construct through make_params.
struct Params {
  double omega = 0.0;
  double p = 0.0;
  double q = 0.0;
  int n = 1;  ///< space dimension
};

inline Params make_params(double omega, double p, double q, int n = 1) {
  if (!std::isfinite(omega) || !std::isfinite(p) || !std::isfinite(q)) {
    throw InvalidParams("omega, p, q must be finite");
  }
  if (!(omega > 0.0)) throw InvalidParams("omega > 0 violated");
  if (!(p > 1.0)) throw InvalidParams("p > 1 violated");
  if (!(q > p)) throw InvalidParams("q > p violated");
  if (n < 1) throw InvalidParams("n >= 1 violated");
  return Params{omega, p, q, n};
}

inline PowerSum f_of(const Params& prm) {
  return PowerSum({{-prm.omega, 1.0}, {1.0, prm.p}, {-1.0, prm.q}});
}

/// F(u) = integral of f from 0 to u.
inline PowerSum F_of(const Params& prm) { return antiderivative(f_of(prm)); }

inline PowerSum fprime_of(const Params& prm) {
  return differentiate(f_of(prm));
}

/// (u f')' f - u f'^2
inline PowerSum ftilde_of(const Params& prm) { return tilde(fprime_of(prm)); }

/// (u f)' F - u f^2
inline PowerSum Ftilde_of(const Params& prm) { return tilde(f_of(prm)); }

/// Critical frequencies and the points where they are attained.
struct Thresholds {
  double omega_crit = 0.0;  ///< existence: F > 0 somewhere iff omega < this
  double eta_crit = 0.0;    ///< f > 0 somewhere iff omega < this
  double u_star_F = 0.0;    ///< maximizer of 2u^{p-1}/(p+1) - 2u^{q-1}/(q+1)
  double u_star_f = 0.0;    ///< maximizer of u^{p-1} - u^{q-1}
};

inline Thresholds thresholds(double p, double q) {
  if (!std::isfinite(p) || !std::isfinite(q) || !(p > 1.0) || !(q > p)) {
    throw InvalidParams("thresholds require q > p > 1");
  }
  const double ratio_F = (p - 1.0) * (q + 1.0) / ((p + 1.0) * (q - 1.0));
  const double ratio_f = (p - 1.0) / (q - 1.0);
  const double power = (p - 1.0) / (q - p);

  Thresholds t;
  t.omega_crit = 2.0 * (q - p) / ((p + 1.0) * (q - 1.0)) *
                 std::pow(ratio_F, power);
  t.eta_crit = (q - p) / (q - 1.0) * std::pow(ratio_f, power);
  t.u_star_F = std::pow(ratio_F, 1.0 / (q - p));
  t.u_star_f = std::pow(ratio_f, 1.0 / (q - p));
  return t;
}

inline Thresholds thresholds(const Params& prm) {
  return thresholds(prm.p, prm.q);
}

/// Positive zeros of f or F, ascending.
struct PositiveZeros {
  std::vector<double> values;
  bool tangent = false;  ///< omega sits on the threshold; one double root
};

namespace detail {

// Zeros of g(u) = -omega + a_coeff u^a - b_coeff u^b, 0 < a < b, which is
// unimodal in log u with its maximum at u_star.
inline PositiveZeros unimodal_zeros(double omega, double a_coeff, double a,
                                    double b_coeff, double b, double u_star) {
  auto g = [=](double u) {
    return -omega + a_coeff * std::pow(u, a) - b_coeff * std::pow(u, b);
  };
  auto dg = [=](double u) {
    return a_coeff * a * std::pow(u, a - 1.0) -
           b_coeff * b * std::pow(u, b - 1.0);
  };

  PositiveZeros out;
  const double peak = g(u_star);
  const double roundoff =
      1e-12 * (omega + a_coeff * std::pow(u_star, a) +
               b_coeff * std::pow(u_star, b));
  if (std::abs(peak) <= roundoff) {
    out.values = {u_star};
    out.tangent = true;
    return out;
  }
  if (peak < 0.0) return out;

  double lo = u_star * 1e-6;
  while (g(lo) >= 0.0 && lo > 1e-300) lo *= 1e-6;
  double hi = u_star * 1e6;
  while (g(hi) >= 0.0 && hi < 1e300) hi *= 1e6;

  const auto left = bisect_root(g, lo, u_star);
  const auto right = bisect_root(g, u_star, hi);
  const double z1 = 0.5 * (left.first + left.second);
  const double z2 = 0.5 * (right.first + right.second);

  const bool flat1 = std::abs(dg(z1)) * z1 < 1e-8 * omega;
  const bool flat2 = std::abs(dg(z2)) * z2 < 1e-8 * omega;
  if (flat1 && flat2) {
    out.values = {u_star};
    out.tangent = true;
  } else {
    out.values = {z1, z2};
  }
  return out;
}

}  // namespace detail

/// Zeros of f on (0, inf): roots of -omega + u^{p-1} - u^{q-1}.
inline PositiveZeros positive_zeros_f(const Params& prm) {
  const auto t = thresholds(prm);
  return detail::unimodal_zeros(prm.omega, 1.0, prm.p - 1.0, 1.0,
                                prm.q - 1.0, t.u_star_f);
}

/// Zeros of F on (0, inf): roots of 2F/u^2.
inline PositiveZeros positive_zeros_F(const Params& prm) {
  const auto t = thresholds(prm);
  return detail::unimodal_zeros(prm.omega, 2.0 / (prm.p + 1.0), prm.p - 1.0,
                                2.0 / (prm.q + 1.0), prm.q - 1.0, t.u_star_F);
}

}  // namespace dpower
