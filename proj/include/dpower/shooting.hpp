#pragma once

// Radial ground states of u'' + (n-1)/r u' + f(u) = 0, u'(0) = 0,
// u -> 0 as r -> inf, by shooting in the initial height.
//
// Heights in the upper half of the shooting interval are held as offsets
// below the upper zero b2 of f, so heights within a few ulps of b2 stay
// distinguishable; heights near the lower end stay plain.

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "dpower/errors.hpp"
#include "dpower/nonlinearity.hpp"
#include "dpower/radial_ode.hpp"
#include "dpower/serialize.hpp"

namespace dpower {

/// Classification of each plain initial height, box disabled.
inline std::vector<OrbitClass> scan_orbits(const Params& prm,
                                           const std::vector<double>& alphas,
                                           const ShootingControls& ctl = {}) {
  const auto c = ctl.without_decay_box();
  std::vector<OrbitClass> out;
  out.reserve(alphas.size());
  for (double a : alphas) {
    out.push_back(
        integrate_resolved(prm, InitialHeight::plain(a), c).orbit_class);
  }
  return out;
}

/// The shooting interval (beta, b2): first zero of F, last zero of f.
struct ShootingInterval {
  double beta = 0.0;
  double b2 = 0.0;

  double width() const { return b2 - beta; }

  /// `count` points uniformly inside the open interval, ascending.
  std::vector<double> grid(int count) const {
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
      out[k] = beta + width() * (k + 1) / static_cast<double>(count + 1);
    }
    return out;
  }

  /// Offsets b2 - alpha of grid(count), in the same (alpha-ascending) order.
  std::vector<double> offset_grid(int count) const {
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
      out[k] = width() * (count - k) / static_cast<double>(count + 1);
    }
    return out;
  }

  /// Height b2 - delta, held as an offset in the upper half of the
  /// interval and as a plain height in the lower half.
  /// `count` Chebyshev points of the open interval as heights, ascending.
  /// They cluster toward both ends, where ground states sit for omega near
  /// its extremes.
  std::vector<InitialHeight> chebyshev_heights(int count) const {
    const double pi = std::acos(-1.0);
    std::vector<InitialHeight> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
      const double theta = pi * (k + 0.5) / count;
      const double s = 0.5 * (1.0 - std::cos(theta));  // in (0, 1)
      if (s <= 0.5) {
        out.push_back(InitialHeight::plain(beta + width() * s));
      } else {
        const double offset = width() * 0.5 * (1.0 + std::cos(theta));
        out.push_back(InitialHeight::below(b2, offset));
      }
    }
    return out;
  }

  InitialHeight at_offset(double delta) const {
    if (delta < 0.5 * width()) return InitialHeight::below(b2, delta);
    return InitialHeight::plain(b2 - delta);
  }
};

inline ShootingInterval shooting_interval(const Params& prm) {
  const auto t = thresholds(prm);
  if (!(prm.omega < t.omega_crit)) {
    throw NoExistence("no positive solution: omega = " +
                          format_real(prm.omega) + " >= omega_crit = " +
                          format_real(t.omega_crit),
                      t.omega_crit);
  }
  const auto zF = positive_zeros_F(prm);
  const auto zf = positive_zeros_f(prm);
  if (zF.values.empty() || zf.values.empty()) {
    throw NoExistence("F or f has no positive zero", t.omega_crit);
  }
  return {zF.values.front(), zf.values.back()};
}

/// Negated least-squares slope of log(r^{(n-1)/2} u) against r over the
/// samples with 0 < u < 1e-3 alpha. The r^{(n-1)/2} factor removes the
/// algebraic part of the linearized tail r^{(1-n)/2} exp(-sqrt(omega) r).
inline double decay_rate(const Trajectory& profile, const Params& prm) {
  const double alpha = profile.alpha();
  const double k = 0.5 * (prm.n - 1);
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int m = 0;
  for (const auto& s : profile.samples) {
    if (s.r <= 0.0 || !(s.u > 0.0) || !(s.u < 1e-3 * alpha)) continue;
    const double y = std::log(s.u) + k * std::log(s.r);
    sx += s.r;
    sy += y;
    sxx += s.r * s.r;
    sxy += s.r * y;
    ++m;
  }
  if (m < 20) {
    throw InsufficientTail("decay fit needs >= 20 tail samples, have " +
                           std::to_string(m));
  }
  const double denom = m * sxx - sx * sx;
  if (!(denom > 0.0)) throw InsufficientTail("degenerate tail window");
  return -(m * sxy - sx * sy) / denom;
}

struct GroundState {
  double alpha = 0.0;
  double alpha_offset = 0.0;  ///< b2 - alpha, at full relative precision
  Trajectory profile;
  double alpha_lo = 0.0;  ///< Rebound side of the final bracket
  double alpha_hi = 0.0;  ///< Crossing side
  double decay_rate = 0.0;
  double ode_residual = 0.0;
};

namespace detail {

inline double offset_of(const InitialHeight& h, const ShootingInterval& iv) {
  return h.anchored() ? h.offset : iv.b2 - h.alpha;
}

// Rebound (lower alpha) / Crossing (higher alpha) pair, adjacent in a scan.
struct HeightBracket {
  InitialHeight rebound;
  InitialHeight crossing;
};

inline std::optional<HeightBracket> find_height_bracket(
    const Params& prm, const ShootingInterval& iv, const ShootingControls& ctl) {
  const auto scan_ctl = ctl.without_decay_box();
  auto shoot = [&](const InitialHeight& h) {
    return integrate_resolved(prm, h, scan_ctl).orbit_class;
  };
  for (int count = ctl.scan_points; count <= ctl.max_scan_points;
       count *= 2) {
    std::vector<InitialHeight> heights;
    std::vector<OrbitClass> classes;
    for (double d : iv.offset_grid(count)) {
      heights.push_back(iv.at_offset(d));
      classes.push_back(shoot(heights.back()));
    }
    for (std::size_t i = 0; i + 1 < heights.size(); ++i) {
      if (classes[i] == OrbitClass::Rebound &&
          classes[i + 1] == OrbitClass::Crossing) {
        return HeightBracket{heights[i], heights[i + 1]};
      }
    }
    // Everything below b2 rebounds: the transition hides closer to b2.
    if (classes.back() == OrbitClass::Rebound) {
      auto prev = heights.back();
      for (double d = offset_of(prev, iv) / 16.0; d > 1e-300; d /= 16.0) {
        const auto h = InitialHeight::below(iv.b2, d);
        const auto c = shoot(h);
        if (c == OrbitClass::Crossing) return HeightBracket{prev, h};
        if (c != OrbitClass::Rebound) break;
        prev = h;
      }
    }
    // Everything above beta crosses: the transition hides closer to beta.
    if (classes.front() == OrbitClass::Crossing) {
      auto prev = heights.front();
      for (double gap = (prev.alpha - iv.beta) / 16.0;; gap /= 16.0) {
        const auto h = InitialHeight::plain(iv.beta + gap);
        if (!(h.alpha > iv.beta)) break;
        const auto c = shoot(h);
        if (c == OrbitClass::Rebound) return HeightBracket{h, prev};
        if (c != OrbitClass::Crossing) break;
        prev = h;
      }
    }
  }
  return std::nullopt;
}

// Midpoint of a bracket in whichever representation resolves it: offsets
// (geometric when they differ by more than 4x) when both ends are offsets,
// plain heights otherwise. Empty once the bracket is within the relative
// tolerance or no representable point lies strictly inside.
inline std::optional<InitialHeight> bracket_midpoint(const InitialHeight& a,
                                                     const InitialHeight& b,
                                                     const ShootingInterval& iv,
                                                     double rel_tol) {
  if (a.anchored() && b.anchored()) {
    const double lo = std::min(a.offset, b.offset);
    const double hi = std::max(a.offset, b.offset);
    if (hi - lo <= rel_tol * hi) return std::nullopt;
    const double mid =
        hi > 4.0 * lo ? std::sqrt(hi) * std::sqrt(lo) : 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) return std::nullopt;
    return InitialHeight::below(iv.b2, mid);
  }
  const double lo = std::min(a.alpha, b.alpha);
  const double hi = std::max(a.alpha, b.alpha);
  if (hi - lo <= rel_tol * hi) return std::nullopt;
  const double mid = 0.5 * (lo + hi);
  if (!(mid > lo && mid < hi)) return std::nullopt;
  if (iv.b2 - mid < 0.5 * iv.width()) {
    return InitialHeight::below(iv.b2, iv.b2 - mid);
  }
  return InitialHeight::plain(mid);
}

}  // namespace detail

/// Ground state by scan and bisection in the offset below b2 (n >= 2), or
/// alpha = beta for n = 1 where energy is conserved and the homoclinic
/// orbit has zero energy.
inline GroundState find_ground_state(const Params& prm,
                                     const ShootingControls& ctl = {}) {
  const auto iv = shooting_interval(prm);
  const auto fine = ctl.refined();
  GroundState gs;
  InitialHeight start;

  if (prm.n == 1) {
    start = InitialHeight::plain(iv.beta);
    gs.alpha = gs.alpha_lo = gs.alpha_hi = iv.beta;
    gs.alpha_offset = iv.width();
  } else {
    const auto bracket = detail::find_height_bracket(prm, iv, ctl);
    if (!bracket) {
      throw BracketNotFound("no Rebound/Crossing transition on (" +
                            format_real(iv.beta) + ", " + format_real(iv.b2) +
                            ")");
    }
    auto reb = bracket->rebound;
    auto crs = bracket->crossing;
    const auto bisect_ctl = fine.without_decay_box();
    bool settled = false;
    while (auto mid = detail::bracket_midpoint(reb, crs, iv, ctl.alpha_tol)) {
      const auto cls = integrate_resolved(prm, *mid, bisect_ctl).orbit_class;
      if (cls == OrbitClass::Rebound) {
        reb = *mid;
      } else if (cls == OrbitClass::Crossing) {
        crs = *mid;
      } else {
        start = *mid;
        settled = true;
        break;
      }
    }
    if (!settled) {
      const auto mid = detail::bracket_midpoint(reb, crs, iv, 0.0);
      start = mid ? *mid : reb;
    }
    gs.alpha = start.alpha;
    gs.alpha_offset = detail::offset_of(start, iv);
    gs.alpha_lo = reb.alpha;
    gs.alpha_hi = crs.alpha;
  }

  gs.profile = integrate_resolved(prm, start, fine);
  if (gs.profile.orbit_class != OrbitClass::Decay) {
    throw BracketNotFound(
        std::string("profile at alpha = ") + format_real(gs.alpha) +
        " classified " + to_string(gs.profile.orbit_class) +
        ", expected Decay");
  }
  gs.decay_rate = decay_rate(gs.profile, prm);
  gs.ode_residual = gs.profile.stats.max_defect;
  return gs;
}

struct ScanPoint {
  InitialHeight height;
  OrbitClass orbit_class;
};

/// Classification at `resolution` Chebyshev heights of (beta, b2), box
/// disabled, ascending in alpha.
inline std::vector<ScanPoint> scan_interval(const Params& prm, int resolution,
                                            const ShootingControls& ctl = {}) {
  if (resolution < 2) {
    throw InvalidParams("scan resolution must be at least 2");
  }
  const auto iv = shooting_interval(prm);
  const auto c = ctl.without_decay_box();
  std::vector<ScanPoint> out;
  for (const auto& h : iv.chebyshev_heights(resolution)) {
    out.push_back({h, integrate_resolved(prm, h, c).orbit_class});
  }
  return out;
}

/// Number of Rebound/Crossing changes along scan_interval; other classes in
/// between are skipped.
inline int count_ground_states(const Params& prm, int scan_resolution,
                               const ShootingControls& ctl = {}) {
  if (prm.n < 2) throw InvalidParams("count_ground_states requires n >= 2");
  int changes = 0;
  std::optional<OrbitClass> last;
  for (const auto& pt : scan_interval(prm, scan_resolution, ctl)) {
    const auto cls = pt.orbit_class;
    if (cls != OrbitClass::Rebound && cls != OrbitClass::Crossing) continue;
    if (last && *last != cls) ++changes;
    last = cls;
  }
  return changes;
}

/// Diagnostics only; the profile itself goes to CSV.
inline Json to_json_summary(const GroundState& g) {
  Json j;
  j["alpha"] = g.alpha;
  j["alpha_offset"] = g.alpha_offset;
  j["bracket"] = Json::array({g.alpha_lo, g.alpha_hi});
  j["decay_rate"] = g.decay_rate;
  j["ode_residual"] = g.ode_residual;
  j["energy_drift"] = g.profile.stats.max_energy_violation;
  j["orbit_class"] = to_string(g.profile.orbit_class);
  j["samples"] = g.profile.samples.size();
  return j;
}

inline Json to_json(const GroundState& g) {
  Json j = to_json_summary(g);
  j.erase("samples");
  j["profile"] = to_json(g.profile);
  return j;
}

}  // namespace dpower
