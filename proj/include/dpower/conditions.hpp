#pragma once

// The existence and uniqueness conditions for the double-power problem,
// each decided by a closed-form threshold and by numeric sign analysis of
// the corresponding power sum, plus cross-checks between the two routes.

#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dpower/errors.hpp"
#include "dpower/nonlinearity.hpp"
#include "dpower/power_sum.hpp"
#include "dpower/serialize.hpp"

namespace dpower {

enum class ConditionId {
  ExistenceF,             ///< F(u) > 0 for some u > 0
  UniquenessFtildeSmall,  ///< ftilde(u) < 0 for all u > 0
  FtildeBig,              ///< Ftilde(u) < 0 for all u > 0
  FPositiveSomewhere,     ///< f(u) > 0 for some u > 0
};

enum class Method { Analytic, Numeric };

inline const char* to_string(ConditionId id) {
  switch (id) {
    case ConditionId::ExistenceF: return "existence";
    case ConditionId::UniquenessFtildeSmall: return "uniqueness";
    case ConditionId::FtildeBig: return "Ftilde";
    case ConditionId::FPositiveSomewhere: return "fpositive";
  }
  return "?";
}

inline const char* to_string(Method m) {
  return m == Method::Analytic ? "analytic" : "numeric";
}

/// Verdict on one condition.
///
/// Analytic reports: margin = omega - threshold, holds iff margin < 0.
/// Numeric reports: margin = supremum of the reduced power sum analysed.
struct ConditionReport {
  ConditionId condition = ConditionId::ExistenceF;
  bool holds = false;
  Method method = Method::Analytic;
  double margin = 0.0;
  std::optional<double> witness;
};

struct ConditionOptions {
  /// Analytic verdicts within this relative distance of the threshold are
  /// reported as IndeterminateNearThreshold.
  double threshold_band = 1e-9;
  SignOptions sign;
};

namespace detail {

inline ConditionReport analytic_report(ConditionId id, const Params& prm,
                                       double threshold, const char* name,
                                       const ConditionOptions& opt) {
  const double margin = prm.omega - threshold;
  if (std::abs(margin) < opt.threshold_band * threshold) {
    throw IndeterminateNearThreshold(
        "omega = " + format_real(prm.omega) + " is at " + name + " = " +
        format_real(threshold));
  }
  return {id, margin < 0.0, Method::Analytic, margin, std::nullopt};
}

inline SignVerdict numeric_sign(const PowerSum& ps, const char* what,
                                const ConditionOptions& opt) {
  try {
    return analyze_sign(ps, opt.sign);
  } catch (const IndeterminateSign& e) {
    throw IndeterminateNearThreshold(std::string("sign of ") + what +
                                     " is indeterminate: " + e.what());
  }
}

}  // namespace detail

/// F(u) > 0 for some u > 0.
inline ConditionReport check_existence(const Params& prm, Method method,
                                       const ConditionOptions& opt = {}) {
  if (method == Method::Analytic) {
    return detail::analytic_report(ConditionId::ExistenceF, prm,
                                   thresholds(prm).omega_crit, "omega_crit",
                                   opt);
  }
  const auto sv = detail::numeric_sign(F_of(prm), "F", opt);
  return {ConditionId::ExistenceF, sv.verdict == Sign::PositiveSomewhere,
          Method::Numeric, sv.sup_value, sv.witness};
}

/// f(u) > 0 for some u > 0. Always numeric.
inline ConditionReport check_f_positive(const Params& prm,
                                        const ConditionOptions& opt = {}) {
  const auto sv = detail::numeric_sign(f_of(prm), "f", opt);
  return {ConditionId::FPositiveSomewhere,
          sv.verdict == Sign::PositiveSomewhere, Method::Numeric,
          sv.sup_value, sv.witness};
}

/// ftilde(u) < 0 for all u > 0. The numeric route is cross-checked against
/// the positivity of f and raises EquivalenceViolation when they disagree.
inline ConditionReport check_uniqueness(const Params& prm, Method method,
                                        const ConditionOptions& opt = {}) {
  if (method == Method::Analytic) {
    return detail::analytic_report(ConditionId::UniquenessFtildeSmall, prm,
                                   thresholds(prm).eta_crit, "eta_crit", opt);
  }
  const auto sv = detail::numeric_sign(ftilde_of(prm), "ftilde", opt);
  const bool holds = sv.verdict == Sign::NegativeEverywhere;
  const auto fpos = check_f_positive(prm, opt);
  if (fpos.holds != holds) {
    throw EquivalenceViolation(
        std::string("ftilde < 0 is ") + format_bool(holds) +
        " but f > 0 somewhere is " + format_bool(fpos.holds) +
        " at omega=" + format_real(prm.omega) + " p=" + format_real(prm.p) +
        " q=" + format_real(prm.q));
  }
  return {ConditionId::UniquenessFtildeSmall, holds, Method::Numeric,
          sv.sup_value, fpos.witness};
}

/// Ftilde(u) < 0 for all u > 0. Always numeric.
inline ConditionReport check_Ftilde(const Params& prm,
                                    const ConditionOptions& opt = {}) {
  const auto sv = detail::numeric_sign(Ftilde_of(prm), "Ftilde", opt);
  return {ConditionId::FtildeBig, sv.verdict == Sign::NegativeEverywhere,
          Method::Numeric, sv.sup_value, sv.witness};
}

inline ConditionReport check_condition(const Params& prm, ConditionId id,
                                       Method method,
                                       const ConditionOptions& opt = {}) {
  switch (id) {
    case ConditionId::ExistenceF: return check_existence(prm, method, opt);
    case ConditionId::UniquenessFtildeSmall:
      return check_uniqueness(prm, method, opt);
    case ConditionId::FtildeBig: return check_Ftilde(prm, opt);
    case ConditionId::FPositiveSomewhere: return check_f_positive(prm, opt);
  }
  throw InvalidParams("unknown condition");
}

// ---------------------------------------------------------------------------
// Equivalence checks

/// Relative distance from both thresholds required by verify_theorem.
inline constexpr double kEquivalenceBand = 1e-6;

struct TheoremRecord {
  bool existence_analytic = false;
  bool existence_numeric = false;
  bool Ftilde_negative = false;
  bool uniqueness_analytic = false;
  bool ftilde_negative = false;
  bool f_positive = false;
  bool consistent = false;
};

/// True when omega is outside the equivalence band of both thresholds.
inline bool off_boundary(const Params& prm, double band = kEquivalenceBand) {
  const auto t = thresholds(prm);
  return std::abs(prm.omega - t.omega_crit) > band * t.omega_crit &&
         std::abs(prm.omega - t.eta_crit) > band * t.eta_crit;
}

/// Checks both equivalences at one off-boundary instance:
/// existence (threshold) = existence (sign of F) = Ftilde < 0, and
/// uniqueness (threshold) = ftilde < 0 = f > 0 somewhere.
inline TheoremRecord verify_theorem(const Params& prm,
                                    const ConditionOptions& opt = {}) {
  if (!off_boundary(prm)) {
    throw IndeterminateNearThreshold(
        "verify_theorem requires omega off both thresholds");
  }
  TheoremRecord r;
  r.existence_analytic = check_existence(prm, Method::Analytic, opt).holds;
  r.existence_numeric = check_existence(prm, Method::Numeric, opt).holds;
  r.Ftilde_negative = check_Ftilde(prm, opt).holds;
  r.uniqueness_analytic = check_uniqueness(prm, Method::Analytic, opt).holds;
  r.ftilde_negative =
      detail::numeric_sign(ftilde_of(prm), "ftilde", opt).verdict ==
      Sign::NegativeEverywhere;
  r.f_positive = check_f_positive(prm, opt).holds;

  const auto where = " at omega=" + format_real(prm.omega) +
                     " p=" + format_real(prm.p) + " q=" + format_real(prm.q);
  auto require = [&](bool a, bool b, const char* pair) {
    if (a != b) {
      throw EquivalenceViolation(std::string(pair) + " disagree (" +
                                 format_bool(a) + " vs " + format_bool(b) +
                                 ")" + where);
    }
  };
  require(r.existence_analytic, r.existence_numeric,
          "existence analytic/numeric");
  require(r.existence_analytic, r.Ftilde_negative, "existence/Ftilde<0");
  require(r.uniqueness_analytic, r.ftilde_negative, "uniqueness/ftilde<0");
  require(r.uniqueness_analytic, r.f_positive, "uniqueness/f>0");
  r.consistent = true;
  return r;
}

struct CorollaryEvidence {
  bool holds = true;
  double omega_crit = 0.0;
  double eta_crit = 0.0;
  bool strict = false;  ///< omega_crit < eta_crit
  int samples = 0;
  int samples_with_existence = 0;
  int samples_skipped = 0;  ///< numeric sign indeterminate
  std::optional<double> falsifying_omega;
  std::string failure;
};

/// Existence implies uniqueness, checked three ways for fixed (p, q):
/// threshold ordering, verdicts at each sampled omega, and the function-level
/// contrapositive (f <= 0 everywhere implies F is nowhere positive).
inline CorollaryEvidence verify_corollary(
    double p, double q, const std::vector<double>& omega_samples,
    const ConditionOptions& opt = {}) {
  CorollaryEvidence ev;
  const auto t = thresholds(p, q);
  ev.omega_crit = t.omega_crit;
  ev.eta_crit = t.eta_crit;
  ev.strict = t.omega_crit < t.eta_crit;
  if (!(t.omega_crit <= t.eta_crit)) {
    ev.holds = false;
    ev.failure = "omega_crit > eta_crit";
    return ev;
  }
  for (double omega : omega_samples) {
    const auto prm = make_params(omega, p, q);
    ++ev.samples;
    const bool existence = omega < t.omega_crit;
    const bool uniqueness = omega < t.eta_crit;
    if (existence) ++ev.samples_with_existence;
    if (existence && !uniqueness) {
      ev.holds = false;
      ev.falsifying_omega = omega;
      ev.failure = "existence without uniqueness";
      return ev;
    }
    try {
      const auto f_sign = analyze_sign(f_of(prm), opt.sign);
      if (f_sign.verdict == Sign::NegativeEverywhere) {
        const auto F_sign = analyze_sign(F_of(prm), opt.sign);
        if (F_sign.verdict == Sign::PositiveSomewhere) {
          ev.holds = false;
          ev.falsifying_omega = omega;
          ev.failure = "f <= 0 everywhere but F > 0 somewhere";
          return ev;
        }
      }
    } catch (const IndeterminateSign&) {
      ++ev.samples_skipped;
    }
  }
  return ev;
}

// ---------------------------------------------------------------------------
// Phase table

struct Range {
  double lo = 0.0;
  double hi = 0.0;

  /// Inclusive grid; a single point when lo == hi.
  std::vector<double> grid(int resolution) const {
    if (lo == hi || resolution <= 1) return {lo};
    std::vector<double> out(static_cast<std::size_t>(resolution));
    for (int i = 0; i < resolution; ++i) {
      out[i] = i + 1 == resolution
                   ? hi
                   : lo + (hi - lo) * static_cast<double>(i) / (resolution - 1);
    }
    return out;
  }
};

struct PhaseRow {
  double p, q, omega, omega_crit, eta_crit;
  bool existence, uniqueness, consistent;
};

using PhaseTable = std::vector<PhaseRow>;

/// One row: analytic verdicts, and whether the numeric routes (where
/// decidable) and the implication existence => uniqueness agree with them.
inline PhaseRow phase_row(const Params& prm,
                          const ConditionOptions& opt = {}) {
  const auto t = thresholds(prm);
  PhaseRow row{prm.p,      prm.q,          prm.omega,
               t.omega_crit, t.eta_crit,
               prm.omega < t.omega_crit, prm.omega < t.eta_crit, true};
  row.consistent = !row.existence || row.uniqueness;
  if (off_boundary(prm)) {
    try {
      const auto rec = verify_theorem(prm, opt);
      row.consistent = row.consistent && rec.consistent &&
                       rec.existence_analytic == row.existence &&
                       rec.uniqueness_analytic == row.uniqueness;
    } catch (const EquivalenceViolation&) {
      row.consistent = false;
    } catch (const IndeterminateNearThreshold&) {
      // numeric route undecidable here; analytic verdict stands
    }
  }
  return row;
}

/// Row-major (p, then q, then omega) grid evaluation; points with q <= p are
/// skipped.
inline PhaseTable sweep(const Range& p_range, const Range& q_range,
                        const Range& omega_range, int resolution,
                        const ConditionOptions& opt = {}) {
  auto check = [](const Range& r, const char* name) {
    if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || r.lo > r.hi) {
      throw InvalidParams(std::string(name) + " range must satisfy lo <= hi");
    }
  };
  check(p_range, "p");
  check(q_range, "q");
  check(omega_range, "omega");
  if (resolution < 1) throw InvalidParams("resolution must be >= 1");
  if (!(p_range.lo > 1.0)) throw InvalidParams("p range must satisfy p > 1");
  if (!(omega_range.lo > 0.0)) {
    throw InvalidParams("omega range must satisfy omega > 0");
  }
  if (!(q_range.hi > p_range.lo)) {
    throw InvalidParams("q range must reach above the p range (q > p)");
  }

  PhaseTable table;
  const auto ps = p_range.grid(resolution);
  const auto qs = q_range.grid(resolution);
  const auto omegas = omega_range.grid(resolution);
  for (double p : ps) {
    for (double q : qs) {
      if (!(q > p)) continue;
      for (double omega : omegas) {
        table.push_back(phase_row(make_params(omega, p, q), opt));
      }
    }
  }
  return table;
}

inline constexpr const char* kPhaseCsvHeader =
    "p,q,omega,omega_crit,eta_crit,existence,uniqueness,consistent";

inline void write_csv(const PhaseTable& table, std::ostream& os) {
  os << kPhaseCsvHeader << '\n';
  for (const auto& r : table) {
    os << format_real(r.p) << ',' << format_real(r.q) << ','
       << format_real(r.omega) << ',' << format_real(r.omega_crit) << ','
       << format_real(r.eta_crit) << ',' << format_bool(r.existence) << ','
       << format_bool(r.uniqueness) << ',' << format_bool(r.consistent)
       << '\n';
  }
}

}  // namespace dpower
