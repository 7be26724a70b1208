#pragma once

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "hypwp/analysis.hpp"
#include "hypwp/conjugator.hpp"
#include "hypwp/io.hpp"
#include "hypwp/levi_weight.hpp"
#include "hypwp/mollify.hpp"
#include "hypwp/moduli.hpp"
#include "hypwp/spectral.hpp"

namespace hypwp::cli {

enum class Command { Analyze, Weights, Simulate, Verify, Fit };

inline const char* command_name(Command c) {
  switch (c) {
    case Command::Analyze: return "analyze";
    case Command::Weights: return "weights";
    case Command::Simulate: return "simulate";
    case Command::Verify: return "verify";
    default: return "fit";
  }
}

enum Exit { kPass = 0, kVerifyFail = 1, kInput = 2, kNumerical = 3 };

struct RunConfig {
  Command command = Command::Analyze;
  std::string spec_path;
  std::string out_dir = ".";
  double xi_min = 1e2, xi_max = 1e8;
  int xi_points = 25;
  double tol = 1e-10;
  int workers = 1;
  unsigned seed = 1;
};

// HYPWP_LOG: quiet | info (default) | debug
inline int log_level() {
  const char* v = std::getenv("HYPWP_LOG");
  if (!v) return 1;
  const std::string s(v);
  if (s == "quiet" || s == "0") return 0;
  if (s == "debug" || s == "2") return 2;
  return 1;
}

inline void log(int level, const std::string& msg) {
  if (level <= log_level()) std::cerr << "[hypwp] " << msg << "\n";
}

inline void validate(const RunConfig& c, const ZonePartition& z) {
  if (!(c.xi_min >= z.M_cut)) throw InputError("--xi-min must be >= M_cut = " + numerics::fmt17(z.M_cut));
  if (!(c.xi_max > c.xi_min)) throw InputError("--xi-max must exceed --xi-min");
  if (c.xi_points < 8) throw InputError("--xi-points must be >= 8");
  if (!(c.tol > 0 && c.tol <= 1e-4)) throw InputError("--tol must lie in (0, 1e-4]");
  if (c.workers < 1) throw InputError("--workers must be >= 1");
}

struct Outcome {
  int code = kPass;
  std::vector<std::string> files;
  std::string summary;
};

namespace detail {

inline std::string out_path(const RunConfig& c, const std::string& name) {
  return (std::filesystem::path(c.out_dir) / name).string();
}

inline io::Json classification_json(const Classification& cl) {
  io::Json checks = io::Json::array();
  for (const auto& ch : cl.checks)
    checks.push_back(io::Json{{"name", ch.name}, {"pass", ch.pass}, {"evidence", ch.evidence}});
  io::Json failing = io::Json::array();
  for (const auto& f : cl.failing()) failing.push_back(f);
  return io::Json{{"verdict", verdict_name(cl.verdict)}, {"checks", checks}, {"failing", failing}};
}

inline ClassifyOptions classify_options(const RunConfig& c) {
  ClassifyOptions o;
  o.xi_min = c.xi_min;
  o.xi_max = c.xi_max;
  o.xi_points = c.xi_points;
  o.eta.seed = c.seed;
  o.eta.workers = c.workers;
  return o;
}

inline io::Json loss_json(const LossReport& r, const ModelProblem& mp) {
  return io::Json{{"C_origin", io::num(r.C_origin)},
                  {"origin_residual", io::num(r.origin_residual)},
                  {"ratio_slope", io::num(r.ratio_slope)},
                  {"ratio_max", io::num(r.ratio_max)},
                  {"plain_slope", io::num(r.plain_slope)},
                  {"theta", io::num(r.theta.theta)},
                  {"theta_c", io::num(r.theta.c)},
                  {"theta_log_coefficient", io::num(r.theta.d)},
                  {"theta_offset", io::num(r.theta.e)},
                  {"theta_residual", io::num(r.theta.residual)},
                  {"levi_audit_C", io::num(mp.audit.C)},
                  {"points", r.rows.size()}};
}

inline io::Csv loss_csv(const LossReport& r) {
  io::Csv csv({"xi", "t_xi", "log_amp", "M_weight"});
  for (const auto& row : r.rows) csv.row({row.xi, row.t_xi, row.log_amp, row.M_weight});
  return csv;
}

inline Outcome analyze(const RunConfig& c, const io::Experiment& ex) {
  const auto cl = classify(ex.ps, classify_options(c));
  Outcome o;
  const auto p = out_path(c, "classification.json");
  io::write_file(p, io::dump17(classification_json(cl)));
  o.files.push_back(p);
  o.summary = std::string("verdict ") + verdict_name(cl.verdict);
  return o;
}

inline Outcome weights(const RunConfig& c, const io::Experiment& ex) {
  const auto grid = numerics::logspace(c.xi_min, c.xi_max, c.xi_points);
  const auto& lw = ex.ps.lw;
  const int m = lw.m();
  struct Row {
    double xi, t, w, W, M;
  };
  const auto rows = numerics::parallel_map(grid.size(), c.workers, [&](std::size_t i) {
    const auto wp = weight_parts(ex.ps, grid[i]);
    const double u = lw.log_Lambda(wp.t_xi);
    return Row{grid[i], wp.t_xi, std::exp(lw.log_wm_u(u) / m), lw.W_u(u), wp.total};
  });
  io::Csv csv({"xi", "t_xi", "w", "W", "M"});
  for (const auto& r : rows) csv.row({r.xi, r.t, r.w, r.W, r.M});
  Outcome o;
  const auto p = out_path(c, "weights.csv");
  io::write_file(p, csv.str());
  o.files.push_back(p);
  o.summary = std::to_string(csv.rows()) + " rows";
  return o;
}

inline Outcome simulate(const RunConfig& c, const io::Experiment& ex) {
  if (!ex.model) throw InputError("$.model: required for simulate");
  ModeOptions mo;
  mo.tol = c.tol;
  mo.log_time = ex.ps.lw.shape().kind() == ShapeKind::ExponentialFlat;
  const auto rep =
      measure_loss(*ex.model, numerics::logspace(c.xi_min, c.xi_max, c.xi_points), mo, c.workers);
  Outcome o;
  const auto pc = out_path(c, "loss.csv"), pj = out_path(c, "loss.json");
  io::write_file(pc, loss_csv(rep).str());
  io::write_file(pj, io::dump17(loss_json(rep, *ex.model)));
  o.files = {pc, pj};
  o.summary = "theta " + numerics::fmt17(rep.theta.theta) + ", C " + numerics::fmt17(rep.C_origin);
  return o;
}

inline Outcome fit(const RunConfig& c, const io::Experiment& ex) {
  if (!ex.fit) throw InputError("$.fit: required for fit");
  const auto grid = numerics::logspace(c.xi_min, c.xi_max, c.xi_points);
  const io::Node g(ex.fit->g, "$.fit.g");
  std::vector<double> f, gv;
  for (double x : grid) {
    const auto wp = weight_parts(ex.ps, x);
    f.push_back(ex.fit->target == "levi" ? wp.levi : ex.fit->target == "phi" ? wp.phi : wp.total);
    gv.push_back(io::eval_fit_g(g, x));
  }
  const auto r = asymptotic_fit(grid, f, gv, ex.fit->tol);
  Outcome o;
  const auto p = out_path(c, "fit.json");
  io::write_file(p, io::dump17(io::Json{{"target", ex.fit->target},
                                        {"g", ex.fit->g},
                                        {"ratio_mean", io::num(r.ratio_mean)},
                                        {"slope", io::num(r.slope)},
                                        {"intercept", io::num(r.intercept)},
                                        {"rms_residual", io::num(r.rms_residual)},
                                        {"tolerance", r.tolerance},
                                        {"pass", r.pass}}));
  o.files.push_back(p);
  o.code = r.pass ? kPass : kVerifyFail;
  o.summary = "slope " + numerics::fmt17(r.slope) + (r.pass ? " (pass)" : " (fail)");
  return o;
}

inline Outcome verify(const RunConfig& c, const io::Experiment& ex) {
  using J = io::Json;
  const auto grid = numerics::logspace(c.xi_min, c.xi_max, c.xi_points);
  std::vector<Check> suites;
  // domain errors inside a suite count as its failure; numerical errors abort (exit 3)
  auto suite = [&](const std::string& name, auto&& body) {
    Check ch;
    ch.name = name;
    try {
      body(ch);
    } catch (const DomainError& e) {
      ch.pass = false;
      ch.evidence = J{{"error", e.what()}};
    } catch (const NumericalError& e) {
      throw NumericalError("verify/" + name + ": " + e.what(), e.achieved());
    }
    log(2, name + (ch.pass ? " pass" : " FAIL"));
    suites.push_back(std::move(ch));
  };
  const auto cl = classify(ex.ps, classify_options(c));
  for (const auto& ch : cl.checks) suites.push_back(ch);
  const auto& lw = ex.ps.lw;
  const double T = lw.shape().T();

  suite("rho_monotone", [&](Check& ch) {
    const auto r = verify_rho_monotone(lw, numerics::logspace(T * 1e-3, T, 100), grid, c.workers);
    ch.pass = r.pass();
    ch.evidence = J{{"points", r.points},
                    {"min_drho_over_rho", io::num(r.min_drho_over_rho)},
                    {"max_bound_ratio", io::num(r.max_bound_ratio)}};
  });
  suite("modulus", [&](Check& ch) {
    const auto r = check_modulus(ex.ps.mu, 2000, c.seed);
    ch.pass = r.pass();
    ch.evidence = J{{"s0", io::num(r.s0)},
                    {"monotonicity_violations", r.monotonicity_violations},
                    {"concavity_violations", r.concavity_violations},
                    {"subadditivity_violations", r.subadditivity_violations}};
  });
  if (ex.model) {
    const auto& mp = *ex.model;
    suite("model_levi_audit", [&](Check& ch) {
      ch.pass = std::isfinite(mp.audit.C);
      J per = J::array();
      for (double v : mp.audit.per_term) per.push_back(io::num(v));
      ch.evidence = J{{"C", io::num(mp.audit.C)}, {"per_term", per}};
    });
    for (std::size_t k = 0; k < mp.principal.size(); ++k) {
      const auto& a = mp.principal[k].a;
      if (a.constant) continue;
      suite("mollifier_principal_" + std::to_string(k), [&](Check& ch) {
        std::vector<double> eps;
        for (int e = 4; e <= 14; ++e) eps.push_back(std::ldexp(1.0, -e));
        const auto tg = adapted_t_grid(numerics::linspace(0.0, a.T, 201), eps, a.breaks);
        const auto r = verify_mollifier_bounds(a, mp.kernel, eps, tg, c.workers);
        ch.pass = r.pass;
        ch.evidence = J{{"slope_R1", io::num(r.slope1)},
                        {"slope_R2", io::num(r.slope2)},
                        {"tolerance", r.tolerance}};
      });
    }
  }
  if (ex.conjugator) {
    suite("phi_reduction", [&](Check& ch) {
      const auto r = verify_phi_reduction(*ex.conjugator, grid, numerics::linspace(0.0, T, 21),
                                          c.workers);
      ch.pass = r.pass();
      ch.evidence = J{{"t1", io::num(r.t1)},
                      {"c2", io::num(r.c2)},
                      {"c5", io::num(r.c5)},
                      {"c6", io::num(r.c6)},
                      {"c2_slope", io::num(r.c2_slope)},
                      {"c5_slope", io::num(r.c5_slope)},
                      {"c6_slope", io::num(r.c6_slope)},
                      {"reduced_gap", io::num(r.reduced_gap)},
                      {"gap_slope", io::num(r.gap_slope)},
                      {"monotone_threshold", io::num(r.monotone_threshold)}};
    });
  }
  J arr = J::array(), failing = J::array();
  for (const auto& s : suites) {
    arr.push_back(J{{"name", s.name}, {"pass", s.pass}, {"evidence", s.evidence}});
    if (!s.pass) failing.push_back(s.name);
  }
  Outcome o;
  const auto p = out_path(c, "verify.json");
  io::write_file(p, io::dump17(J{{"suites", arr}, {"failing", failing}}));
  o.files.push_back(p);
  o.code = failing.empty() ? kPass : kVerifyFail;
  std::string names;
  for (const auto& f : failing) names += (names.empty() ? "" : ", ") + f.get<std::string>();
  o.summary = failing.empty() ? "all suites pass" : "failing: " + names;
  return o;
}

}  // namespace detail

// Loads the spec, dispatches and maps exceptions onto the exit-code contract.
inline Outcome run(const RunConfig& c) {
  Outcome o;
  try {
    const auto ex = io::load_experiment(c.spec_path);
    validate(c, ex.ps.zones);
    std::filesystem::create_directories(c.out_dir);
    log(1, std::string(command_name(c.command)) + " " + c.spec_path);
    switch (c.command) {
      case Command::Analyze: o = detail::analyze(c, ex); break;
      case Command::Weights: o = detail::weights(c, ex); break;
      case Command::Simulate: o = detail::simulate(c, ex); break;
      case Command::Verify: o = detail::verify(c, ex); break;
      case Command::Fit: o = detail::fit(c, ex); break;
    }
  } catch (const InputError& e) {
    o.code = kInput;
    o.summary = std::string("input error: ") + e.what();
  } catch (const std::filesystem::filesystem_error& e) {
    o.code = kInput;
    o.summary = std::string("input error: ") + e.what();
  } catch (const NumericalError& e) {
    o.code = kNumerical;
    o.summary = std::string("numerical error in ") + command_name(c.command) + ": " + e.what();
  } catch (const DomainError& e) {
    o.code = kNumerical;
    o.summary = std::string("numerical error in ") + command_name(c.command) + ": " + e.what();
  }
  return o;
}

}  // namespace hypwp::cli
