#pragma once

// Command-line front end. Kept in a header so tests can drive it in-process.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <CLI11.hpp>

#include "dpower/conditions.hpp"
#include "dpower/errors.hpp"
#include "dpower/nonlinearity.hpp"
#include "dpower/serialize.hpp"
#include "dpower/shooting.hpp"

namespace dpower::cli {

enum ExitCode : int {
  kOk = 0,
  kInvalidInput = 2,
  kConditionFalse = 3,
  kIndeterminate = 4,
  kEquivalenceViolation = 5,
  kSolverFailure = 6,
  kIoFailure = 7,
};

enum class Format { Human, Json, Csv };

class IoFailure : public Error {
 public:
  using Error::Error;
};

/// "lo:hi", or a single value for a degenerate range.
inline Range parse_range(const std::string& text, const std::string& name) {
  auto parse_real = [&](std::string_view s) {
    double x = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size() ||
        !std::isfinite(x)) {
      throw InvalidParams(name + " range '" + text + "' is not lo:hi");
    }
    return x;
  };
  const std::string_view sv(text);
  const auto colon = sv.find(':');
  Range r;
  if (colon == std::string_view::npos) {
    r.lo = r.hi = parse_real(sv);
  } else {
    r.lo = parse_real(sv.substr(0, colon));
    r.hi = parse_real(sv.substr(colon + 1));
  }
  if (r.lo > r.hi) {
    throw InvalidParams(name + " range '" + text + "' has lo > hi");
  }
  return r;
}

namespace detail {

struct Config {
  std::string output = "human";
  double omega = 0.0, p = 0.0, q = 0.0;
  int n = 1;
  std::string condition = "existence";
  std::string method = "analytic";
  int samples = 1000;
  std::uint64_t seed = 1;
  std::string p_range = "1:6", q_range = "1:6";
  std::string p_sweep, q_sweep, omega_sweep;
  int resolution = 10;
  std::string out_path, json_path;
  std::optional<double> rtol, atol, alpha_tol;

  Format format() const {
    if (output == "json") return Format::Json;
    if (output == "csv") return Format::Csv;
    return Format::Human;
  }
};

inline std::ofstream open_output(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoFailure("cannot open '" + path + "' for writing");
  return f;
}

inline void finish_output(std::ofstream& f, const std::string& path) {
  f.flush();
  if (!f) throw IoFailure("write to '" + path + "' failed");
}

inline std::string optional_real(const std::optional<double>& x) {
  return x ? format_real(*x) : std::string();
}

inline Json optional_json(const std::optional<double>& x) {
  return x ? Json(*x) : Json(nullptr);
}

// ---------------------------------------------------------------------------

inline int cmd_thresholds(const Config& cfg, std::ostream& out) {
  const auto prm = make_params(1.0, cfg.p, cfg.q);
  const auto t = thresholds(prm);
  switch (cfg.format()) {
    case Format::Json: {
      Json j;
      j["omega_crit"] = t.omega_crit;
      j["eta_crit"] = t.eta_crit;
      j["u_star_F"] = t.u_star_F;
      j["u_star_f"] = t.u_star_f;
      out << to_json_text(j) << '\n';
      break;
    }
    case Format::Csv:
      out << "p,q,omega_crit,eta_crit,u_star_F,u_star_f\n"
          << format_real(cfg.p) << ',' << format_real(cfg.q) << ','
          << format_real(t.omega_crit) << ',' << format_real(t.eta_crit) << ','
          << format_real(t.u_star_F) << ',' << format_real(t.u_star_f) << '\n';
      break;
    case Format::Human:
      out << "omega_crit=" << format_real(t.omega_crit) << '\n'
          << "eta_crit=" << format_real(t.eta_crit) << '\n'
          << "u_star_F=" << format_real(t.u_star_F) << '\n'
          << "u_star_f=" << format_real(t.u_star_f) << '\n';
  }
  return kOk;
}

inline ConditionId parse_condition(const std::string& s) {
  if (s == "existence") return ConditionId::ExistenceF;
  if (s == "uniqueness") return ConditionId::UniquenessFtildeSmall;
  if (s == "Ftilde") return ConditionId::FtildeBig;
  if (s == "fpositive") return ConditionId::FPositiveSomewhere;
  throw InvalidParams("unknown condition '" + s + "'");
}

inline int cmd_check(const Config& cfg, std::ostream& out) {
  const auto prm = make_params(cfg.omega, cfg.p, cfg.q, cfg.n);
  const auto method =
      cfg.method == "numeric" ? Method::Numeric : Method::Analytic;
  const auto rep = check_condition(prm, parse_condition(cfg.condition), method);
  switch (cfg.format()) {
    case Format::Json: {
      Json j;
      j["condition"] = to_string(rep.condition);
      j["method"] = to_string(rep.method);
      j["holds"] = rep.holds;
      j["margin"] = rep.margin;
      j["witness"] = optional_json(rep.witness);
      out << to_json_text(j) << '\n';
      break;
    }
    case Format::Csv:
      out << "condition,method,holds,margin,witness\n"
          << to_string(rep.condition) << ',' << to_string(rep.method) << ','
          << format_bool(rep.holds) << ',' << format_real(rep.margin) << ','
          << optional_real(rep.witness) << '\n';
      break;
    case Format::Human:
      out << "condition=" << to_string(rep.condition) << '\n'
          << "method=" << to_string(rep.method) << '\n'
          << "holds=" << format_bool(rep.holds) << '\n'
          << "margin=" << format_real(rep.margin) << '\n';
      if (rep.witness) out << "witness=" << format_real(*rep.witness) << '\n';
  }
  return rep.holds ? kOk : kConditionFalse;
}

// Uniform in [0, 1) from the top 53 bits; identical on every platform.
inline double unit_draw(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double draw_in(const Range& r, std::mt19937_64& rng) {
  return r.lo == r.hi ? r.lo : r.lo + (r.hi - r.lo) * unit_draw(rng);
}

struct VerifySample {
  double p, q, omega, omega_crit, eta_crit;
  std::string status;  ///< pass, skipped, fail
  bool existence = false, uniqueness = false;
  std::string reason;
};

inline int cmd_verify(const Config& cfg, std::ostream& out) {
  if (cfg.samples < 1) throw InvalidParams("samples must be >= 1");
  const auto pr = parse_range(cfg.p_range, "p");
  const auto qr = parse_range(cfg.q_range, "q");
  if (!(pr.hi > 1.0)) throw InvalidParams("p range must reach above 1");
  if (!(qr.hi > std::max(pr.lo, 1.0))) {
    throw InvalidParams("q range must reach above the p range (q > p)");
  }

  std::mt19937_64 rng(cfg.seed);
  std::vector<VerifySample> rows;
  int passed = 0, skipped = 0, failed = 0, strict = 0;
  for (int i = 0; i < cfg.samples; ++i) {
    double p = 0.0, q = 0.0;
    int attempts = 0;
    do {
      if (++attempts > 100000) {
        throw InvalidParams("ranges admit no pair with q > p > 1");
      }
      p = draw_in(pr, rng);
      q = draw_in(qr, rng);
    } while (!(p > 1.0 && q > p));
    const auto t = thresholds(p, q);
    const double lo = std::log(0.25 * t.omega_crit);
    const double hi = std::log(4.0 * t.eta_crit);
    const double omega = std::exp(lo + (hi - lo) * unit_draw(rng));
    const auto prm = make_params(omega, p, q);

    VerifySample s{p, q, omega, t.omega_crit, t.eta_crit, "pass", false, false, {}};
    s.existence = omega < t.omega_crit;
    s.uniqueness = omega < t.eta_crit;
    if (t.omega_crit < t.eta_crit) ++strict;

    const auto cor = verify_corollary(p, q, {omega});
    if (!cor.holds) {
      s.status = "fail";
      s.reason = "corollary: " + cor.failure;
    } else if (!off_boundary(prm)) {
      s.status = "skipped";
      s.reason = "inside threshold band";
    } else {
      try {
        verify_theorem(prm);
      } catch (const EquivalenceViolation& e) {
        s.status = "fail";
        s.reason = e.what();
      } catch (const IndeterminateNearThreshold& e) {
        s.status = "skipped";
        s.reason = e.what();
      }
    }
    if (s.status == "pass") ++passed;
    if (s.status == "skipped") ++skipped;
    if (s.status == "fail") ++failed;
    rows.push_back(std::move(s));
  }

  switch (cfg.format()) {
    case Format::Json: {
      Json j;
      j["samples"] = cfg.samples;
      j["seed"] = cfg.seed;
      j["passed"] = passed;
      j["skipped_in_band"] = skipped;
      j["failed"] = failed;
      j["strict_threshold_order"] = strict;
      Json fails = Json::array();
      for (const auto& s : rows) {
        if (s.status != "fail") continue;
        fails.push_back({{"p", s.p}, {"q", s.q}, {"omega", s.omega},
                         {"reason", s.reason}});
      }
      j["failures"] = std::move(fails);
      out << to_json_text(j) << '\n';
      break;
    }
    case Format::Csv:
      out << "p,q,omega,omega_crit,eta_crit,existence,uniqueness,status\n";
      for (const auto& s : rows) {
        out << format_real(s.p) << ',' << format_real(s.q) << ','
            << format_real(s.omega) << ',' << format_real(s.omega_crit) << ','
            << format_real(s.eta_crit) << ',' << format_bool(s.existence)
            << ',' << format_bool(s.uniqueness) << ',' << s.status << '\n';
      }
      break;
    case Format::Human:
      out << "samples=" << cfg.samples << '\n'
          << "seed=" << cfg.seed << '\n'
          << "passed=" << passed << '\n'
          << "skipped_in_band=" << skipped << '\n'
          << "failures=" << failed << '\n'
          << "strict_threshold_order=" << strict << '\n';
      for (const auto& s : rows) {
        if (s.status != "fail") continue;
        out << "failure p=" << format_real(s.p) << " q=" << format_real(s.q)
            << " omega=" << format_real(s.omega) << ": " << s.reason << '\n';
      }
  }
  return failed == 0 ? kOk : kEquivalenceViolation;
}

inline int cmd_solve(const Config& cfg, std::ostream& out, std::ostream& err) {
  const auto prm = make_params(cfg.omega, cfg.p, cfg.q, cfg.n);
  ShootingControls ctl;
  if (cfg.rtol) ctl.rtol = *cfg.rtol;
  if (cfg.atol) ctl.atol = *cfg.atol;
  if (cfg.alpha_tol) ctl.alpha_tol = *cfg.alpha_tol;
  if (!(ctl.rtol > 0.0) || !(ctl.atol > 0.0) || !(ctl.alpha_tol > 0.0)) {
    throw InvalidParams("tolerances must be positive");
  }

  GroundState gs;
  try {
    gs = find_ground_state(prm, ctl);
  } catch (const NoExistence& e) {
    err << "no ground state: omega=" << format_real(prm.omega)
        << " >= omega_crit=" << format_real(e.omega_crit) << '\n';
    return kConditionFalse;
  } catch (const Error& e) {
    if (dynamic_cast<const InvalidParams*>(&e)) throw;
    Json dump;
    dump["error"] = e.what();
    dump["params"] = {{"omega", prm.omega}, {"p", prm.p}, {"q", prm.q},
                      {"n", prm.n}};
    try {
      const auto iv = shooting_interval(prm);
      dump["interval"] = Json::array({iv.beta, iv.b2});
    } catch (const Error&) {
    }
    dump["controls"] = {{"rtol", ctl.rtol}, {"atol", ctl.atol},
                        {"alpha_tol", ctl.alpha_tol}};
    err << "solver failure\n" << to_json_text(dump) << '\n';
    return kSolverFailure;
  }

  Json summary = to_json_summary(gs);
  if (!cfg.out_path.empty()) {
    auto f = open_output(cfg.out_path);
    write_profile_csv(gs.profile, f);
    finish_output(f, cfg.out_path);
  }
  if (!cfg.json_path.empty()) {
    auto f = open_output(cfg.json_path);
    f << to_json_text(summary) << '\n';
    finish_output(f, cfg.json_path);
  }

  switch (cfg.format()) {
    case Format::Json:
      out << to_json_text(summary) << '\n';
      break;
    case Format::Csv:
      write_profile_csv(gs.profile, out);
      break;
    case Format::Human:
      out << "alpha=" << format_real(gs.alpha) << '\n'
          << "alpha_offset=" << format_real(gs.alpha_offset) << '\n'
          << "bracket=" << format_real(gs.alpha_lo) << ':'
          << format_real(gs.alpha_hi) << '\n'
          << "decay_rate=" << format_real(gs.decay_rate) << '\n'
          << "ode_residual=" << format_real(gs.ode_residual) << '\n'
          << "energy_drift="
          << format_real(gs.profile.stats.max_energy_violation) << '\n'
          << "samples=" << gs.profile.samples.size() << '\n';
  }
  return kOk;
}

inline Json to_json(const PhaseRow& r) {
  Json j;
  j["p"] = r.p;
  j["q"] = r.q;
  j["omega"] = r.omega;
  j["omega_crit"] = r.omega_crit;
  j["eta_crit"] = r.eta_crit;
  j["existence"] = r.existence;
  j["uniqueness"] = r.uniqueness;
  j["consistent"] = r.consistent;
  return j;
}

inline int cmd_sweep(const Config& cfg, std::ostream& out) {
  std::optional<std::ofstream> file;
  if (!cfg.out_path.empty()) file = open_output(cfg.out_path);
  const auto table =
      sweep(parse_range(cfg.p_sweep, "p"), parse_range(cfg.q_sweep, "q"),
            parse_range(cfg.omega_sweep, "omega"), cfg.resolution);
  int inconsistent = 0, existence = 0, uniqueness = 0;
  for (const auto& r : table) {
    inconsistent += r.consistent ? 0 : 1;
    existence += r.existence ? 1 : 0;
    uniqueness += r.uniqueness ? 1 : 0;
  }

  if (file) {
    write_csv(table, *file);
    finish_output(*file, cfg.out_path);
  }
  const bool to_stdout = cfg.out_path.empty();
  switch (cfg.format()) {
    case Format::Json:
      if (to_stdout) {
        Json rows = Json::array();
        for (const auto& r : table) rows.push_back(to_json(r));
        out << to_json_text(rows) << '\n';
      } else {
        Json j;
        j["rows"] = table.size();
        j["existence"] = existence;
        j["uniqueness"] = uniqueness;
        j["inconsistent"] = inconsistent;
        j["out"] = cfg.out_path;
        out << to_json_text(j) << '\n';
      }
      break;
    case Format::Csv:
      if (to_stdout) write_csv(table, out);
      break;
    case Format::Human:
      if (to_stdout) {
        write_csv(table, out);
      } else {
        out << "rows=" << table.size() << '\n'
            << "existence=" << existence << '\n'
            << "uniqueness=" << uniqueness << '\n'
            << "inconsistent=" << inconsistent << '\n'
            << "out=" << cfg.out_path << '\n';
      }
  }
  return inconsistent == 0 ? kOk : kEquivalenceViolation;
}

}  // namespace detail

/// Parses and runs one command. Returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out,
               std::ostream& err) {
  detail::Config cfg;
  CLI::App app{"Double-power nonlinearity: thresholds, conditions, ground "
               "states",
               "dpower"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--output", cfg.output, "human, json or csv")
      ->check(CLI::IsMember({"human", "json", "csv"}))
      ->capture_default_str();

  auto* thr = app.add_subcommand("thresholds", "critical frequencies");
  thr->add_option("--p", cfg.p)->required();
  thr->add_option("--q", cfg.q)->required();

  auto add_params = [&cfg](CLI::App* sub) {
    sub->add_option("--omega", cfg.omega)->required();
    sub->add_option("--p", cfg.p)->required();
    sub->add_option("--q", cfg.q)->required();
    sub->add_option("--n", cfg.n, "space dimension")->capture_default_str();
  };

  auto* chk = app.add_subcommand("check", "evaluate one condition");
  add_params(chk);
  chk->add_option("--condition", cfg.condition)
      ->check(CLI::IsMember({"existence", "uniqueness", "Ftilde", "fpositive"}))
      ->capture_default_str();
  chk->add_option("--method", cfg.method)
      ->check(CLI::IsMember({"analytic", "numeric"}))
      ->capture_default_str();

  auto* ver = app.add_subcommand("verify", "sampled equivalence checks");
  ver->add_option("--samples", cfg.samples)->capture_default_str();
  ver->add_option("--seed", cfg.seed)->capture_default_str();
  ver->add_option("--p-range", cfg.p_range, "lo:hi")->capture_default_str();
  ver->add_option("--q-range", cfg.q_range, "lo:hi")->capture_default_str();

  auto* sol = app.add_subcommand("solve", "radial ground state");
  add_params(sol);
  sol->add_option("--out", cfg.out_path, "profile CSV path");
  sol->add_option("--json", cfg.json_path, "diagnostics JSON path");
  sol->add_option("--rtol", cfg.rtol);
  sol->add_option("--atol", cfg.atol);
  sol->add_option("--alpha-tol", cfg.alpha_tol);

  auto* swp = app.add_subcommand("sweep", "phase table over a grid");
  swp->add_option("--p", cfg.p_sweep, "lo:hi")->required();
  swp->add_option("--q", cfg.q_sweep, "lo:hi")->required();
  swp->add_option("--omega", cfg.omega_sweep, "lo:hi")->required();
  swp->add_option("--res", cfg.resolution)->capture_default_str();
  swp->add_option("--out", cfg.out_path, "CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInvalidInput;
  }

  try {
    if (thr->parsed()) return detail::cmd_thresholds(cfg, out);
    if (chk->parsed()) return detail::cmd_check(cfg, out);
    if (ver->parsed()) return detail::cmd_verify(cfg, out);
    if (sol->parsed()) return detail::cmd_solve(cfg, out, err);
    if (swp->parsed()) return detail::cmd_sweep(cfg, out);
  } catch (const InvalidParams& e) {
    err << "invalid input: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const DomainError& e) {
    err << "invalid input: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const IndeterminateNearThreshold& e) {
    err << "indeterminate: " << e.what() << '\n';
    return kIndeterminate;
  } catch (const IndeterminateSign& e) {
    err << "indeterminate: " << e.what() << '\n';
    return kIndeterminate;
  } catch (const EquivalenceViolation& e) {
    err << "equivalence violation: " << e.what() << '\n';
    return kEquivalenceViolation;
  } catch (const NoExistence& e) {
    err << e.what() << '\n';
    return kConditionFalse;
  } catch (const IoFailure& e) {
    err << "i/o failure: " << e.what() << '\n';
    return kIoFailure;
  } catch (const Error& e) {
    err << "solver failure: " << e.what() << '\n';
    return kSolverFailure;
  }
  return kInvalidInput;
}

inline int run(const std::vector<std::string>& args, std::ostream& out,
               std::ostream& err) {
  std::vector<const char*> argv{"dpower"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace dpower::cli
