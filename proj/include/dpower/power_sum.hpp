#pragma once

// Finite sums of real-exponent power terms, sum_i c_i * u^{e_i}, on u > 0.
//
// Every PowerSum is kept in normal form: exponents strictly ascending, no two
// exponents equal within kExponentTolerance, no zero coefficients.

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dpower/errors.hpp"
#include "dpower/scalar_search.hpp"

namespace dpower {

/// |e1 - e2| <= kExponentTolerance * max(1, |e1|) means "same exponent".
inline constexpr double kExponentTolerance = 1e-12;

/// A merged coefficient whose magnitude is below this fraction of the summed
/// magnitudes of its contributions is pure roundoff and is dropped.
inline constexpr double kCancellationTolerance =
    4.0 * std::numeric_limits<double>::epsilon();

inline bool same_exponent(double e1, double e2) {
  return std::abs(e1 - e2) <= kExponentTolerance * std::max(1.0, std::abs(e1));
}

struct PowerTerm {
  double coeff = 0.0;
  double exponent = 0.0;

  friend bool operator==(const PowerTerm&, const PowerTerm&) = default;
};

class PowerSum {
public:
  PowerSum() = default;

  explicit PowerSum(std::vector<PowerTerm> terms) : terms_(std::move(terms)) {
    normalize();
  }

  PowerSum(std::initializer_list<PowerTerm> terms)
      : PowerSum(std::vector<PowerTerm>(terms)) {}

  /// The single term c * u^e.
  static PowerSum monomial(double coeff, double exponent) {
    return PowerSum({PowerTerm{coeff, exponent}});
  }

  const std::vector<PowerTerm>& terms() const noexcept { return terms_; }
  std::size_t size() const noexcept { return terms_.size(); }
  bool is_zero() const noexcept { return terms_.empty(); }

  /// Largest coefficient magnitude; 0 for the zero sum.
  double coeff_scale() const noexcept {
    double s = 0.0;
    for (const auto& t : terms_) s = std::max(s, std::abs(t.coeff));
    return s;
  }

  double operator()(double u) const {
    if (!(u > 0.0)) {
      throw DomainError("PowerSum evaluated at u = " + std::to_string(u) +
                        "; requires u > 0");
    }
    double acc = 0.0;
    for (const auto& t : terms_) acc += t.coeff * std::pow(u, t.exponent);
    if (!std::isnan(acc)) return acc;
    // inf - inf: factor out the dominant power so the result saturates with
    // the right sign.
    const double e = u > 1.0 ? terms_.back().exponent : terms_.front().exponent;
    double s = 0.0;
    for (const auto& t : terms_) s += t.coeff * std::pow(u, t.exponent - e);
    return s * std::pow(u, e);
  }

  friend bool operator==(const PowerSum&, const PowerSum&) = default;

private:
  void normalize() {
    std::stable_sort(terms_.begin(), terms_.end(),
                     [](const PowerTerm& a, const PowerTerm& b) {
                       return a.exponent < b.exponent;
                     });
    std::vector<PowerTerm> merged;
    merged.reserve(terms_.size());
    std::size_t i = 0;
    while (i < terms_.size()) {
      const double e = terms_[i].exponent;
      double sum = 0.0;
      double magnitude = 0.0;
      std::size_t j = i;
      for (; j < terms_.size() && same_exponent(e, terms_[j].exponent); ++j) {
        sum += terms_[j].coeff;
        magnitude += std::abs(terms_[j].coeff);
      }
      if (sum != 0.0 && std::abs(sum) > kCancellationTolerance * magnitude) {
        merged.push_back({sum, e});
      }
      i = j;
    }
    terms_ = std::move(merged);
  }

  std::vector<PowerTerm> terms_;
};

/// Builds a normalized sum from (coeff, exponent) pairs.
inline PowerSum make_power_sum(
    const std::vector<std::pair<double, double>>& pairs) {
  std::vector<PowerTerm> terms;
  terms.reserve(pairs.size());
  for (const auto& [c, e] : pairs) terms.push_back({c, e});
  return PowerSum(std::move(terms));
}

inline double evaluate(const PowerSum& ps, double u) { return ps(u); }

inline PowerSum add(const PowerSum& a, const PowerSum& b) {
  std::vector<PowerTerm> terms = a.terms();
  terms.insert(terms.end(), b.terms().begin(), b.terms().end());
  return PowerSum(std::move(terms));
}

inline PowerSum scale(const PowerSum& a, double c) {
  std::vector<PowerTerm> terms = a.terms();
  for (auto& t : terms) t.coeff *= c;
  return PowerSum(std::move(terms));
}

inline PowerSum multiply(const PowerSum& a, const PowerSum& b) {
  std::vector<PowerTerm> terms;
  terms.reserve(a.size() * b.size());
  for (const auto& x : a.terms()) {
    for (const auto& y : b.terms()) {
      terms.push_back({x.coeff * y.coeff, x.exponent + y.exponent});
    }
  }
  return PowerSum(std::move(terms));
}

inline PowerSum operator+(const PowerSum& a, const PowerSum& b) {
  return add(a, b);
}
inline PowerSum operator-(const PowerSum& a, const PowerSum& b) {
  return add(a, scale(b, -1.0));
}
inline PowerSum operator*(const PowerSum& a, const PowerSum& b) {
  return multiply(a, b);
}
inline PowerSum operator*(double c, const PowerSum& a) { return scale(a, c); }

inline PowerSum differentiate(const PowerSum& ps) {
  std::vector<PowerTerm> terms;
  terms.reserve(ps.size());
  for (const auto& t : ps.terms()) {
    if (same_exponent(t.exponent, 0.0)) continue;
    terms.push_back({t.coeff * t.exponent, t.exponent - 1.0});
  }
  return PowerSum(std::move(terms));
}

/// Antiderivative vanishing at u = 0, i.e. the definite integral from 0.
inline PowerSum antiderivative(const PowerSum& ps) {
  std::vector<PowerTerm> terms;
  terms.reserve(ps.size());
  for (const auto& t : ps.terms()) {
    if (same_exponent(t.exponent, -1.0)) {
      throw ExponentMinusOne("antiderivative of u^-1 is not a power sum");
    }
    if (t.exponent < -1.0) {
      throw DomainError("integral from 0 of u^" + std::to_string(t.exponent) +
                        " diverges");
    }
    terms.push_back({t.coeff / (t.exponent + 1.0), t.exponent + 1.0});
  }
  return PowerSum(std::move(terms));
}

/// (u h)' H - u h^2 with H the antiderivative of h vanishing at 0.
///
/// tilde(f) is the Ftilde expression built from f and F; tilde(f') is the
/// ftilde expression built from f' and f, provided f has no constant term.
///
/// Expanding the products, the (i, j) and (j, i) contributions combine to
/// c_i c_j (e_i - e_j)^2 / ((e_i + 1)(e_j + 1)) u^{e_i + e_j + 1} and the
/// diagonal vanishes, so the sum is formed pairwise without cancellation.
inline PowerSum tilde(const PowerSum& h) {
  antiderivative(h);  // rejects exponents <= -1
  const auto& ts = h.terms();
  std::vector<PowerTerm> terms;
  terms.reserve(ts.size() * ts.size() / 2);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    for (std::size_t j = i + 1; j < ts.size(); ++j) {
      const double d = ts[j].exponent - ts[i].exponent;
      const double c = ts[i].coeff * ts[j].coeff * d * d /
                       ((ts[i].exponent + 1.0) * (ts[j].exponent + 1.0));
      terms.push_back({c, ts[i].exponent + ts[j].exponent + 1.0});
    }
  }
  return PowerSum(std::move(terms));
}

// ---------------------------------------------------------------------------
// Sign analysis on (0, inf)

enum class Sign { NegativeEverywhere, PositiveSomewhere, ZeroEverywhere };

inline const char* to_string(Sign s) {
  switch (s) {
    case Sign::NegativeEverywhere: return "NegativeEverywhere";
    case Sign::PositiveSomewhere: return "PositiveSomewhere";
    case Sign::ZeroEverywhere: return "ZeroEverywhere";
  }
  return "?";
}

/// Outcome of analyze_sign.
///
/// The supremum is taken over the reduced sum ps(u) / u^{e_min}, which has
/// the same sign as ps everywhere on (0, inf) but does not collapse to 0 at
/// u -> 0+. `sup_value` may be +inf; `sup_arg` is empty when the supremum is
/// only approached at 0+ or at infinity.
struct SignVerdict {
  Sign verdict = Sign::ZeroEverywhere;
  std::optional<double> witness;
  double sup_value = 0.0;
  std::optional<double> sup_arg;
};

struct SignOptions {
  int grid_points = 4096;
  double grid_lo = 1e-8;
  double grid_hi = 1e8;
  double refine_rel_width = 1e-12;
  /// |sup| below sign_tolerance * coeff_scale is IndeterminateSign.
  double sign_tolerance = 1e-11;
};

namespace detail {

struct Candidate {
  double value;
  std::optional<double> arg;
};

// Interior critical point of c0 + c1 u^d1 + c2 u^d2 (0 < d1 < d2), if any.
// The value there is c0 + c1 (1 - d1/d2) u^d1, evaluated through log u so it
// saturates to +-inf instead of forming inf - inf; the argument is empty
// when u itself is not representable.
inline std::optional<Candidate> two_term_critical_point(double c0,
                                                        const PowerTerm& a,
                                                        const PowerTerm& b) {
  const double ratio = -(a.coeff * a.exponent) / (b.coeff * b.exponent);
  if (!(ratio > 0.0)) return std::nullopt;
  const double log_u = std::log(ratio) / (b.exponent - a.exponent);
  const double scale = a.coeff * (1.0 - a.exponent / b.exponent);
  const double value = c0 + scale * std::exp(a.exponent * log_u);
  const double u = std::exp(log_u);
  Candidate c{value, std::nullopt};
  if (u > 0.0 && std::isfinite(u)) c.arg = u;
  return c;
}

// Walks outward from `u` by `factor` while g keeps increasing, then refines
// the last three points with golden section.
template <typename Fn>
Candidate chase_edge_max(const Fn& g, double u, double factor,
                         double rel_width) {
  double prev = u;
  double cur = u * factor;
  double g_prev = g(prev);
  double g_cur = g(cur);
  for (int i = 0; i < 64 && g_cur > g_prev; ++i) {
    const double next = cur * factor;
    const double g_next = g(next);
    if (!std::isfinite(g_next) || next == 0.0 || !std::isfinite(next)) break;
    if (g_next <= g_cur) {
      const double lo = std::min(prev, next);
      const double hi = std::max(prev, next);
      const auto ext = golden_section_max(g, lo, hi, rel_width);
      return {ext.value, ext.arg};
    }
    prev = cur;
    g_prev = g_cur;
    cur = next;
    g_cur = g_next;
  }
  return {std::max(g_cur, g_prev), g_cur >= g_prev ? cur : prev};
}

}  // namespace detail

/// Decides the sign of ps on (0, inf).
///
/// After factoring out u^{e_min}, sums with at most two non-constant terms
/// are handled by their closed-form critical point; anything larger by a
/// log-spaced grid scan with golden-section refinement of every local
/// maximum. Limits at 0+ (the constant term) and at infinity (sign of the
/// leading coefficient) are always included.
inline SignVerdict analyze_sign(const PowerSum& ps,
                                const SignOptions& opt = {}) {
  SignVerdict out;
  if (ps.is_zero()) return out;

  const auto& terms = ps.terms();
  const double e0 = terms.front().exponent;
  std::vector<PowerTerm> reduced;
  reduced.reserve(terms.size());
  for (const auto& t : terms) reduced.push_back({t.coeff, t.exponent - e0});

  auto g = [&reduced](double u) {
    double acc = 0.0;
    for (const auto& t : reduced) acc += t.coeff * std::pow(u, t.exponent);
    return acc;
  };

  std::vector<detail::Candidate> cands;
  cands.push_back({reduced.front().coeff, std::nullopt});  // limit at 0+
  const double inf = std::numeric_limits<double>::infinity();
  if (reduced.size() > 1) {
    cands.push_back({reduced.back().coeff > 0.0 ? inf : -inf, std::nullopt});
  }

  if (reduced.size() == 3) {
    if (auto c = detail::two_term_critical_point(reduced[0].coeff,
                                                 reduced[1], reduced[2])) {
      cands.push_back(*c);
    }
  } else if (reduced.size() > 3) {
    const int n = std::max(opt.grid_points, 3);
    const double t_lo = std::log(opt.grid_lo);
    const double t_hi = std::log(opt.grid_hi);
    std::vector<double> us(n), gs(n);
    for (int i = 0; i < n; ++i) {
      us[i] = std::exp(t_lo + (t_hi - t_lo) * i / (n - 1));
      gs[i] = g(us[i]);
    }
    for (int i = 1; i + 1 < n; ++i) {
      if (gs[i] >= gs[i - 1] && gs[i] >= gs[i + 1]) {
        const auto ext =
            golden_section_max(g, us[i - 1], us[i + 1], opt.refine_rel_width);
        const bool better = ext.value >= gs[i];
        cands.push_back({better ? ext.value : gs[i], better ? ext.arg : us[i]});
      }
    }
    if (gs[0] > gs[1]) {
      cands.push_back(
          detail::chase_edge_max(g, us[1], 0.1, opt.refine_rel_width));
    }
    if (gs[n - 1] > gs[n - 2]) {
      cands.push_back(
          detail::chase_edge_max(g, us[n - 2], 10.0, opt.refine_rel_width));
    }
  }

  cands.erase(std::remove_if(cands.begin(), cands.end(),
                             [](const auto& c) { return std::isnan(c.value); }),
              cands.end());
  const auto best = std::max_element(
      cands.begin(), cands.end(),
      [](const auto& a, const auto& b) { return a.value < b.value; });
  out.sup_value = best->value;
  out.sup_arg = best->arg;

  const double tol = opt.sign_tolerance * ps.coeff_scale();
  if (std::abs(out.sup_value) < tol) {
    throw IndeterminateSign("supremum " + std::to_string(out.sup_value) +
                                " is within sign tolerance of zero",
                            out.sup_value);
  }
  if (out.sup_value < 0.0) {
    out.verdict = Sign::NegativeEverywhere;
    return out;
  }

  out.verdict = Sign::PositiveSomewhere;
  // Where ps overflows near the argmax, halve towards 0 while the sum stays
  // on the positive side.
  if (out.sup_arg) {
    double u = *out.sup_arg;
    for (int i = 0; i < 4096 && u > 0.0; ++i, u *= 0.5) {
      const double v = ps(u);
      if (v > 0.0) {
        out.witness = u;
        return out;
      }
      if (!std::isnan(v)) break;
    }
  }
  // Supremum approached at an end of (0, inf), or past the largest double:
  // walk towards it.
  const bool toward_zero = best == cands.begin();
  double u = 1.0;
  for (int i = 0; i < 4096; ++i) {
    const double v = ps(u);
    if (v > 0.0) {
      out.witness = u;
      return out;
    }
    u = toward_zero ? u * 0.5 : u * 2.0;
    if (u == 0.0 || !std::isfinite(u)) break;
  }
  return out;
}

}  // namespace dpower
