#pragma once

// Initial-value integration of the radial equation
//   u'' + (n-1)/r u' + f(u) = 0,  u(0) = alpha, u'(0) = 0
// with orbit classification for shooting.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "dpower/dopri5.hpp"
#include "dpower/errors.hpp"
#include "dpower/nonlinearity.hpp"
#include "dpower/power_sum.hpp"
#include "dpower/serialize.hpp"

namespace dpower {

struct RadialState {
  double r = 0.0;
  double u = 0.0;
  double v = 0.0;  ///< u_r
};

enum class OrbitClass { Crossing, Rebound, Decay, Equilibrium, Indeterminate };

inline const char* to_string(OrbitClass c) {
  switch (c) {
    case OrbitClass::Crossing: return "Crossing";
    case OrbitClass::Rebound: return "Rebound";
    case OrbitClass::Decay: return "Decay";
    case OrbitClass::Equilibrium: return "Equilibrium";
    case OrbitClass::Indeterminate: return "Indeterminate";
  }
  return "?";
}

enum class TerminalReason {
  ZeroCrossing,      ///< stopped at the located u = 0 event
  SlopeZero,         ///< stopped at the located u_r = 0 event
  DecayBox,
  EquilibriumStart,  ///< alpha is a zero of f; nothing to integrate
  RMaxReached,
};

inline const char* to_string(TerminalReason t) {
  switch (t) {
    case TerminalReason::ZeroCrossing: return "ZeroCrossing";
    case TerminalReason::SlopeZero: return "SlopeZero";
    case TerminalReason::DecayBox: return "DecayBox";
    case TerminalReason::EquilibriumStart: return "EquilibriumStart";
    case TerminalReason::RMaxReached: return "RMaxReached";
  }
  return "?";
}

/// Initial height, either plain or as an exact offset below an anchor
/// (the upper zero b2 of f). The offset form keeps full relative precision
/// of b2 - alpha when alpha is closer to b2 than a double can resolve.
struct InitialHeight {
  double alpha = 0.0;
  double anchor = 0.0;  ///< 0 for the plain form
  double offset = 0.0;  ///< anchor - alpha

  static InitialHeight plain(double alpha) { return {alpha, 0.0, 0.0}; }
  static InitialHeight below(double anchor, double offset) {
    return {anchor - offset, anchor, offset};
  }
  bool anchored() const { return anchor > 0.0; }
};

struct TrajectoryStats {
  int steps = 0;
  int rejected_steps = 0;
  double min_energy = 0.0;
  /// n >= 2: largest energy increase between consecutive samples.
  /// n == 1: largest |E(r) - E(0)|.
  double max_energy_violation = 0.0;
  /// Largest |y'_dense - rhs(y_dense)| at step midpoints.
  double max_defect = 0.0;
};

struct Trajectory {
  std::vector<RadialState> samples;
  OrbitClass orbit_class = OrbitClass::Indeterminate;
  TerminalReason terminal_reason = TerminalReason::RMaxReached;
  TrajectoryStats stats;
  InitialHeight start;

  double alpha() const { return samples.empty() ? 0.0 : samples.front().u; }
};

struct ShootingControls {
  double rtol = 1e-10;
  double atol = 1e-12;    ///< relative to alpha (to the offset near b2)
  double r_max = 0.0;     ///< 0: 50 / sqrt(omega)
  double max_step = 0.0;  ///< 0: 0.05 / sqrt(omega); bounds sample spacing
  /// Decay box: 0 < u < decay_box * alpha, u_r < 0, |u_r| < 2 sqrt(omega) u.
  /// 0 disables the box.
  double decay_box = 1e-6;
  double eps_v = 1e-6;        ///< descent threshold, times sqrt(omega) alpha
  double eps_f = 1e-9;        ///< equilibrium threshold, times omega alpha
  double delta_decay = 1e-8;  ///< rebound floor, times alpha
  /// Anchored starts integrate the deviation from b2 until it exceeds this
  /// fraction of b2.
  double plateau_switch = 1e-3;
  double alpha_tol = 1e-12;  ///< bisection width, relative to b2 - alpha
  /// Bisection and the final profile run at rtol, atol times this factor.
  double refine_tol_factor = 1e-2;
  int scan_points = 64;
  int max_scan_points = 4096;

  double r_max_for(double omega) const {
    return r_max > 0.0 ? r_max : 50.0 / std::sqrt(omega);
  }
  double max_step_for(double omega) const {
    return max_step > 0.0 ? max_step : 0.05 / std::sqrt(omega);
  }
  ShootingControls refined() const {
    ShootingControls c = *this;
    c.rtol *= refine_tol_factor;
    c.atol *= refine_tol_factor;
    return c;
  }
  ShootingControls without_decay_box() const {
    ShootingControls c = *this;
    c.decay_box = 0.0;
    return c;
  }
};

namespace detail {

inline bool integer_valued(double x) { return std::floor(x) == x; }

struct RadialProblem {
  Params prm;
  PowerSum F;
  double sqrt_omega;

  explicit RadialProblem(const Params& p)
      : prm(p), F(F_of(p)), sqrt_omega(std::sqrt(p.omega)) {}

  // For u < 0, reached only by stages of the step that crosses zero, the odd
  // extension keeps everything finite.
  double f(double u) const {
    const double a = std::abs(u);
    const double val =
        -prm.omega * a + std::pow(a, prm.p) - std::pow(a, prm.q);
    return u < 0.0 ? -val : val;
  }

  double fprime(double u) const {
    const double a = std::abs(u);
    return -prm.omega + prm.p * std::pow(a, prm.p - 1.0) -
           prm.q * std::pow(a, prm.q - 1.0);
  }

  Vec<2> rhs(double r, const Vec<2>& y) const {
    const double damping = r > 0.0 ? (prm.n - 1) / r * y[1] : 0.0;
    return {y[1], -damping - f(y[0])};
  }
};

// f(anchor - w) for small w by its Taylor series about the anchor, with the
// constant term f(anchor) (roundoff-sized at a zero of f) dropped.
struct PlateauForce {
  static constexpr int kOrder = 14;
  double coeff[kOrder + 1] = {};

  PlateauForce(const Params& prm, double anchor) {
    // k-th derivative of u^e at the anchor, times (-1)^k / k!
    auto term = [anchor](double e, int k) {
      double c = 1.0;
      for (int j = 0; j < k; ++j) c *= (e - j) / (j + 1);
      return c * std::pow(anchor, e - k) * ((k % 2) ? -1.0 : 1.0);
    };
    for (int k = 1; k <= kOrder; ++k) {
      coeff[k] = term(prm.p, k) - term(prm.q, k);
    }
    coeff[1] += prm.omega;  // -omega * (anchor - w) contributes +omega w
  }

  double operator()(double w) const {
    double acc = 0.0;
    for (int k = kOrder; k >= 1; --k) acc = (acc + coeff[k]) * w;
    return acc;
  }
};

}  // namespace detail

/// E = u_r^2 / 2 + F(u).
inline double energy(const RadialState& s, const Params& prm,
                     const PowerSum& F) {
  const double kinetic = 0.5 * s.v * s.v;
  if (s.u > 0.0) return kinetic + F(s.u);
  if (s.u == 0.0) return kinetic;
  if (!detail::integer_valued(prm.p) || !detail::integer_valued(prm.q)) {
    throw DomainError("energy at u < 0 needs integer p and q");
  }
  double acc = kinetic;
  for (const auto& t : F.terms()) acc += t.coeff * std::pow(s.u, t.exponent);
  return acc;
}

inline double energy(const RadialState& s, const Params& prm) {
  return energy(s, prm, F_of(prm));
}

/// Classifies a trajectory by scanning its samples in order: the first of
/// u <= 0 (Crossing), u_r >= 0 after descent with u above the rebound floor
/// (Rebound), or entry into the decay box (Decay). Plain starts at a zero
/// of f are Equilibrium.
inline OrbitClass classify_orbit(const Trajectory& traj, const Params& prm,
                                 const ShootingControls& ctl = {}) {
  if (traj.samples.empty()) return OrbitClass::Indeterminate;
  const double alpha = traj.alpha();
  const double sqrt_omega = std::sqrt(prm.omega);
  if (!traj.start.anchored()) {
    const detail::RadialProblem problem(prm);
    if (std::abs(problem.f(alpha)) < ctl.eps_f * prm.omega * alpha) {
      return OrbitClass::Equilibrium;
    }
  } else if (traj.start.offset == 0.0) {
    return OrbitClass::Equilibrium;
  }
  const double eps_v = ctl.eps_v * sqrt_omega * alpha;
  const double delta = ctl.delta_decay * alpha;
  bool descending = false;
  for (const auto& s : traj.samples) {
    if (s.u <= 0.0) return OrbitClass::Crossing;
    if (s.r > 0.0 && descending && s.v >= 0.0 && s.u > delta) {
      return OrbitClass::Rebound;
    }
    if (ctl.decay_box > 0.0 && s.u < ctl.decay_box * alpha && s.v < 0.0 &&
        std::abs(s.v) < 2.0 * sqrt_omega * s.u) {
      return OrbitClass::Decay;
    }
    if (s.v < -eps_v) descending = true;
  }
  return OrbitClass::Indeterminate;
}

namespace detail {

// Bisects the dense output of one step for a sign change of component idx.
// Returns the time and state on the far side of the change.
inline Vec<2> locate_zero(const DenseStep<2>& dense, std::size_t idx,
                          double& t_event) {
  double lo = dense.t0;
  double hi = dense.t0 + dense.h;
  const double sign_lo = dense.value(lo)[idx] > 0.0 ? 1.0 : -1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (dense.value(mid)[idx] * sign_lo > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  t_event = hi;
  return dense.value(hi);
}

inline void fill_energy_stats(Trajectory& traj, const Params& prm,
                              const PowerSum& F) {
  auto& st = traj.stats;
  const double e0 = energy(traj.samples.front(), prm, F);
  st.min_energy = e0;
  st.max_energy_violation = 0.0;
  double prev = e0;
  for (std::size_t i = 1; i < traj.samples.size(); ++i) {
    const double e = energy(traj.samples[i], prm, F);
    st.min_energy = std::min(st.min_energy, e);
    const double drift = prm.n >= 2 ? e - prev : std::abs(e - e0);
    st.max_energy_violation = std::max(st.max_energy_violation, drift);
    prev = e;
  }
}

}  // namespace detail

/// Integrates from u(0) = alpha, u_r(0) = 0 until the first classification
/// event or r_max.
///
/// The removable singularity at r = 0 is crossed by the series
/// u(h) = alpha - f(alpha) h^2 / (2n), u_r(h) = -f(alpha) h / n. Anchored
/// starts integrate w = anchor - u (with f expanded about the anchor) until
/// w exceeds plateau_switch * anchor, then continue in u.
inline Trajectory integrate_radial(const Params& prm, const InitialHeight& start,
                                   const ShootingControls& ctl = {}) {
  if (!(start.alpha > 0.0) || !std::isfinite(start.alpha) ||
      start.offset < 0.0) {
    throw DomainError("initial height alpha must be positive");
  }
  const detail::RadialProblem problem(prm);
  const double alpha = start.alpha;
  const double sqrt_omega = problem.sqrt_omega;
  const double r_max = ctl.r_max_for(prm.omega);
  const double h_max = ctl.max_step_for(prm.omega);
  const double eps_v = ctl.eps_v * sqrt_omega * alpha;
  const double delta = ctl.delta_decay * alpha;
  const double n = prm.n;

  Trajectory traj;
  traj.start = start;
  traj.samples.push_back({0.0, alpha, 0.0});

  const bool plateau = start.anchored() && start.offset > 0.0 &&
                       start.offset < ctl.plateau_switch * start.anchor;
  const detail::PlateauForce plateau_force(
      prm, start.anchored() ? start.anchor : 1.0);
  const double f_alpha =
      plateau ? plateau_force(start.offset) : problem.f(alpha);

  if (classify_orbit(traj, prm, ctl) == OrbitClass::Equilibrium) {
    traj.samples.push_back({r_max, alpha, 0.0});
    traj.orbit_class = OrbitClass::Equilibrium;
    traj.terminal_reason = TerminalReason::EquilibriumStart;
    detail::fill_energy_stats(traj, prm, problem.F);
    return traj;
  }

  // In plateau mode y = (w, v) with w = anchor - u; otherwise y = (u, v).
  bool in_plateau = plateau;
  auto rhs_u = [&problem](double r, const Vec<2>& y) {
    return problem.rhs(r, y);
  };
  auto rhs_w = [&problem, &plateau_force, n](double r, const Vec<2>& y) {
    const double damping = r > 0.0 ? (n - 1.0) / r * y[1] : 0.0;
    return Vec<2>{-y[1], -damping - plateau_force(y[0])};
  };
  auto rhs = [&](double r, const Vec<2>& y) {
    return in_plateau ? rhs_w(r, y) : rhs_u(r, y);
  };
  auto u_of = [&](const Vec<2>& y) {
    return in_plateau ? start.anchor - y[0] : y[0];
  };
  const double scale = in_plateau ? start.offset : alpha;
  Vec<2> atol{ctl.atol * scale, ctl.atol * scale};

  const double h0 = std::min(
      1e-3, 1e-2 / std::sqrt(std::abs(problem.fprime(alpha)) + prm.omega));
  const double du = -f_alpha * h0 * h0 / (2.0 * n);
  Vec<2> y = in_plateau ? Vec<2>{start.offset - du, -f_alpha * h0 / n}
                        : Vec<2>{alpha + du, -f_alpha * h0 / n};
  double r = h0;
  traj.samples.push_back({r, u_of(y), y[1]});

  Vec<2> k1 = rhs(r, y);
  double h = std::min(h_max, 10.0 * h0);
  bool descending = y[1] < -eps_v;

  while (r < r_max) {
    h = std::min({h, h_max, r_max - r});
    if (h <= 1e-14 * std::max(1.0, r)) {
      throw StepSizeUnderflow("step size underflow at r = " + format_real(r));
    }
    const auto step = dopri5_step<2>(rhs, r, y, k1, h, ctl.rtol, atol);
    if (!std::isfinite(step.error) || !std::isfinite(step.y1[0]) ||
        !std::isfinite(step.y1[1])) {
      if (h <= 1e-12 * std::max(1.0, r)) {
        throw NonFiniteState("non-finite state at r = " + format_real(r));
      }
      ++traj.stats.rejected_steps;
      h *= 0.2;
      continue;
    }
    if (step.error > 1.0) {
      ++traj.stats.rejected_steps;
      h *= dopri5_step_factor(step.error);
      continue;
    }
    ++traj.stats.steps;

    {
      const double mid = r + 0.5 * h;
      const auto ym = step.dense.value(mid);
      if (u_of(ym) > 0.0) {
        const auto dym = step.dense.derivative(mid);
        const auto fm = rhs(mid, ym);
        traj.stats.max_defect =
            std::max({traj.stats.max_defect, std::abs(dym[0] - fm[0]),
                      std::abs(dym[1] - fm[1])});
      }
    }

    const double r_new = r + h;
    const Vec<2> y_new = step.y1;
    const double u_new = u_of(y_new);
    if (u_new <= 0.0) {
      double r_event = r_new;
      const auto ye = detail::locate_zero(step.dense, 0, r_event);
      traj.samples.push_back({r_event, 0.0, ye[1]});
      traj.terminal_reason = TerminalReason::ZeroCrossing;
      break;
    }
    if (descending && y_new[1] >= 0.0 && u_new > delta) {
      double r_event = r_new;
      const auto ye = detail::locate_zero(step.dense, 1, r_event);
      traj.samples.push_back({r_event, u_of(ye), std::max(ye[1], 0.0)});
      traj.terminal_reason = TerminalReason::SlopeZero;
      break;
    }
    traj.samples.push_back({r_new, u_new, y_new[1]});
    if (y_new[1] < -eps_v) descending = true;
    if (ctl.decay_box > 0.0 && u_new < ctl.decay_box * alpha &&
        y_new[1] < 0.0 && std::abs(y_new[1]) < 2.0 * sqrt_omega * u_new) {
      traj.terminal_reason = TerminalReason::DecayBox;
      break;
    }
    if (std::abs(u_new) > 1e100) {
      throw NonFiniteState("solution blew up at r = " + format_real(r_new));
    }
    r = r_new;
    y = y_new;
    h *= dopri5_step_factor(step.error);
    if (in_plateau && y[0] > ctl.plateau_switch * start.anchor) {
      in_plateau = false;
      y = {start.anchor - y[0], y[1]};
      atol = {ctl.atol * alpha, ctl.atol * alpha};
    }
    k1 = rhs(r, y);
  }

  traj.orbit_class = classify_orbit(traj, prm, ctl);
  detail::fill_energy_stats(traj, prm, problem.F);
  return traj;
}

inline Trajectory integrate_radial(const Params& prm, double alpha,
                                   const ShootingControls& ctl = {}) {
  return integrate_radial(prm, InitialHeight::plain(alpha), ctl);
}

/// integrate_radial, doubling r_max (at most 2^max_growth times) while the
/// orbit is still unresolved when r_max is reached.
inline Trajectory integrate_resolved(const Params& prm,
                                     const InitialHeight& start,
                                     const ShootingControls& ctl = {},
                                     int max_growth = 6) {
  ShootingControls c = ctl;
  c.r_max = ctl.r_max_for(prm.omega);
  auto traj = integrate_radial(prm, start, c);
  for (int i = 0; i < max_growth &&
                  traj.terminal_reason == TerminalReason::RMaxReached;
       ++i) {
    c.r_max *= 2.0;
    traj = integrate_radial(prm, start, c);
  }
  return traj;
}

// ---------------------------------------------------------------------------
// Serialization

inline Json to_json(const Trajectory& t) {
  Json samples = Json::array();
  for (const auto& s : t.samples) {
    samples.push_back(Json::array({s.r, s.u, s.v}));
  }
  Json j;
  j["orbit_class"] = to_string(t.orbit_class);
  j["terminal_reason"] = to_string(t.terminal_reason);
  j["stats"] = {{"steps", t.stats.steps},
                {"rejected_steps", t.stats.rejected_steps},
                {"min_energy", t.stats.min_energy},
                {"max_energy_violation", t.stats.max_energy_violation},
                {"max_defect", t.stats.max_defect}};
  j["samples"] = std::move(samples);
  return j;
}

inline constexpr const char* kProfileCsvHeader = "r,u,u_r";

inline void write_profile_csv(const Trajectory& t, std::ostream& os) {
  os << kProfileCsvHeader << '\n';
  for (const auto& s : t.samples) {
    os << format_real(s.r) << ',' << format_real(s.u) << ','
       << format_real(s.v) << '\n';
  }
}

}  // namespace dpower
