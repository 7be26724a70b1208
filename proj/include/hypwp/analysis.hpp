#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "hypwp/errors.hpp"
#include "hypwp/levi_weight.hpp"
#include "hypwp/moduli.hpp"
#include "hypwp/numerics.hpp"
#include "hypwp/shape.hpp"
#include "hypwp/weight_function.hpp"

namespace hypwp {

struct ProblemSpec {
  LeviWeight lw;
  Modulus mu;
  WeightSequence ws;
  WeightFunction eta;
  ZonePartition zones;
  double nu = 0;
};

struct WeightParts {
  double xi = 0, t_xi = 0, levi = 0, phi = 0, total = 0;
  bool clamped = false;
};

// M(<xi>) = W(Lambda(t_xi)) w(Lambda(t_xi))^{m-1} + phi(<xi>), split.
inline WeightParts weight_parts(const LeviWeight& lw, const ZonePartition& z,
                                const Modulus& mu, double xi) {
  const TXi tx = t_xi(lw, z, xi);
  const int m = lw.m();
  WeightParts r;
  r.xi = xi;
  r.t_xi = tx.t;
  r.clamped = tx.clamped;
  r.levi = lw.W_u(tx.log_Lambda) * std::exp(lw.log_wm_u(tx.log_Lambda) * (m - 1.0) / m);
  r.phi = mu.phi(xi);
  r.total = r.levi + r.phi;
  return r;
}

inline WeightParts weight_parts(const ProblemSpec& ps, double xi) {
  return weight_parts(ps.lw, ps.zones, ps.mu, xi);
}

inline double total_weight(const ProblemSpec& ps, double xi) {
  return weight_parts(ps, xi).total;
}

enum class Dominance { LeviDominant, ModulusDominant, Comparable };

inline const char* dominance_name(Dominance d) {
  switch (d) {
    case Dominance::LeviDominant: return "LeviDominant";
    case Dominance::ModulusDominant: return "ModulusDominant";
    default: return "Comparable";
  }
}

struct DominanceResult {
  Dominance kind = Dominance::Comparable;
  double slope = 0;
  std::vector<double> xi, levi, phi, ratio;
};

inline DominanceResult dominance(const ProblemSpec& ps,
                                 const std::vector<double>& xi_grid,
                                 double threshold = 0.02, int workers = 1) {
  if (xi_grid.size() < 2 || xi_grid.back() / xi_grid.front() < 1e3 * (1 - 1e-12))
    throw DomainError("dominance needs a grid spanning at least 3 decades");
  DominanceResult r;
  const auto parts = numerics::parallel_map(
      xi_grid.size(), workers, [&](std::size_t i) { return weight_parts(ps, xi_grid[i]); });
  for (const auto& p : parts) {
    r.xi.push_back(p.xi);
    r.levi.push_back(p.levi);
    r.phi.push_back(p.phi);
    r.ratio.push_back(p.levi / p.phi);
  }
  r.slope = numerics::loglog_slope(r.xi, r.ratio);
  r.kind = r.slope > threshold    ? Dominance::LeviDominant
           : r.slope < -threshold ? Dominance::ModulusDominant
                                  : Dominance::Comparable;
  return r;
}

struct FitReport {
  double ratio_mean = 0;
  double slope = 0;     // of log(f/g) against log <xi>
  double intercept = 0;
  double rms_residual = 0;
  bool pass = false;
  double tolerance = 0;
};

inline FitReport asymptotic_fit(const std::vector<double>& xi,
                                const std::vector<double>& f,
                                const std::vector<double>& g,
                                double tolerance = 0.02) {
  if (xi.size() != f.size() || xi.size() != g.size() || xi.size() < 2)
    throw DomainError("asymptotic_fit needs aligned series of length >= 2");
  std::vector<double> lx, lr;
  FitReport r;
  for (std::size_t i = 0; i < xi.size(); ++i) {
    lx.push_back(std::log(xi[i]));
    lr.push_back(std::log(f[i] / g[i]));
    r.ratio_mean += f[i] / g[i];
  }
  r.ratio_mean /= static_cast<double>(xi.size());
  const auto lf = numerics::fit_line(lx, lr);
  r.slope = lf.slope;
  r.intercept = lf.intercept;
  r.rms_residual = lf.rms_residual;
  r.tolerance = tolerance;
  r.pass = std::fabs(r.slope) < tolerance;
  return r;
}

// Closed form of Example 2: (s-1)/s X^{1/s} log X, X = <xi>/((s-1)/s log <xi>).
inline double example2_weight(double s, double xi) {
  const double c = (s - 1) / s;
  const double X = xi / (c * std::log(xi));
  return c * std::pow(X, 1 / s) * std::log(X);
}

// Closed form of the general characterization for the
// (s, m~, beta~) family, transcribed as printed:
// X = <xi> / (log^[m~](<xi>^{(s-1)/s}))^{1/beta~},
// weight ~ X^{1/s} (log^[m~](X^{(s-1)/s}))^{beta~}.
inline double family_weight(double s, int m_tilde, double beta, double xi) {
  auto ilog = [m_tilde](double v) {
    for (int k = 0; k < m_tilde; ++k) v = std::log(v);
    return v;
  };
  const double c = (s - 1) / s;
  const double X = xi / std::pow(ilog(std::pow(xi, c)), 1 / beta);
  return std::pow(X, 1 / s) * std::pow(ilog(std::pow(X, c)), beta);
}

struct A9Report {
  bool holds = false;
  std::vector<double> log_t;
  std::vector<double> log_product;  // log(lambda^m w^{m(m-1)})
  double net_exponent = 0;          // symbolic, NaN for custom weights
  bool monotone = false;
  double peak_log_t = 0;
  double drop = 0;                  // log-product at T/2 minus the last value
};

// Decreasing log t grid from log(T/2) deep toward 0.
inline std::vector<double> default_a9_grid(const LeviWeight& lw, int n = 400) {
  const double top = std::log(lw.shape().T() / 2);
  const double depth = lw.shape().kind() == ShapeKind::ExponentialFlat
                           ? 40 / lw.shape().parameter()
                           : 4000 * std::log(10.0);
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    g[static_cast<std::size_t>(i)] = top - depth * i / (n - 1);
  return g;
}

inline A9Report check_A9(const LeviWeight& lw, const std::vector<double>& log_t_grid) {
  A9Report r;
  r.log_t = log_t_grid;
  r.net_exponent = lw.a9_net_exponent();
  const int m = lw.m();
  auto P = [&](double lt) {
    return m * lw.shape().log_lambda(lt) +
           (m - 1) * lw.log_wm_u(lw.shape().log_Lambda(lt));
  };
  for (double lt : log_t_grid) r.log_product.push_back(P(lt));
  const double ref = P(std::log(lw.shape().T() / 2));
  // monotone decay is required past the sampled peak; flat shapes rise
  // briefly below T/2 before the decay sets in
  const std::size_t peak = static_cast<std::size_t>(
      std::max_element(r.log_product.begin(), r.log_product.end()) -
      r.log_product.begin());
  r.peak_log_t = r.log_t[peak];
  r.monotone = true;
  for (std::size_t i = peak + 1; i < r.log_product.size(); ++i)
    if (r.log_product[i] >= r.log_product[i - 1] + 1e-12 * std::fabs(r.log_product[i - 1]))
      r.monotone = false;
  r.drop = ref - r.log_product.back();
  r.holds = r.monotone && r.drop > std::log(1e6);
  return r;
}

enum class EtaMode { Little_o, Big_O };

struct EtaReport {
  std::vector<double> xi, M, eta, ratio;
  double decrease_factor = 0;   // ratio.front() / ratio.back()
  double ratio_slope = 0;       // log-log slope of M/eta
  bool ratio_monotone = false;
  bool little_o = false;
  bool big_o = false;
  int pairs = 0, pairs_skipped = 0;
  int subadd_violations_eta = 0, subadd_violations_M = 0;
  double k1_eta = 0, k1_M = 0, k2_eta = 0, k2_M = 0;  // max over the grid
  bool derivatives_bounded = false;
  bool pass(EtaMode mode) const {
    const bool base = subadd_violations_eta == 0 && subadd_violations_M == 0 &&
                      derivatives_bounded;
    return base && (mode == EtaMode::Little_o ? little_o : big_o);
  }
};

struct EtaOptions {
  int pair_samples = 200;
  unsigned seed = 1;
  int workers = 1;
  double growth_tolerance = 0.05;
};

namespace detail {

// |f'(x)| x / f(x) and |f''(x)| x^2 / f(x), differenced in log x.
template <class F>
std::pair<double, double> log_derivative_ratios(F&& f, double x) {
  const double h = 1e-3;
  const double fm = f(x * std::exp(-h)), f0 = f(x), fp = f(x * std::exp(h));
  const double d1 = (fp - fm) / (2 * h);          // x f'
  const double d2 = (fp - 2 * f0 + fm) / (h * h);  // x^2 f'' + x f'
  return {std::fabs(d1) / f0, std::fabs(d2 - d1) / f0};
}

inline double growth_slope(const std::vector<double>& x, const std::vector<double>& r) {
  std::vector<double> y(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) y[i] = 1 + r[i];
  return numerics::loglog_slope(x, y);
}

}  // namespace detail

inline EtaReport check_eta_admissible(const ProblemSpec& ps, EtaMode mode,
                                      const std::vector<double>& xi_grid,
                                      const EtaOptions& opt = {}) {
  (void)mode;
  EtaReport r;
  struct Row {
    double M, eta, k1e, k2e, k1m, k2m;
  };
  auto Mf = [&](double x) { return total_weight(ps, x); };
  const auto rows = numerics::parallel_map(xi_grid.size(), opt.workers, [&](std::size_t i) {
    const double x = xi_grid[i];
    const auto de = detail::log_derivative_ratios(ps.eta, x);
    const auto dm = detail::log_derivative_ratios(Mf, x);
    return Row{Mf(x), ps.eta(x), de.first, de.second, dm.first, dm.second};
  });
  std::vector<double> k1e, k2e, k1m, k2m;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    r.xi.push_back(xi_grid[i]);
    r.M.push_back(rows[i].M);
    r.eta.push_back(rows[i].eta);
    r.ratio.push_back(rows[i].M / rows[i].eta);
    k1e.push_back(rows[i].k1e);
    k2e.push_back(rows[i].k2e);
    k1m.push_back(rows[i].k1m);
    k2m.push_back(rows[i].k2m);
  }
  r.k1_eta = *std::max_element(k1e.begin(), k1e.end());
  r.k2_eta = *std::max_element(k2e.begin(), k2e.end());
  r.k1_M = *std::max_element(k1m.begin(), k1m.end());
  r.k2_M = *std::max_element(k2m.begin(), k2m.end());
  const double g = opt.growth_tolerance;
  r.derivatives_bounded =
      std::isfinite(r.k1_eta + r.k2_eta + r.k1_M + r.k2_M) &&
      detail::growth_slope(r.xi, k1e) <= g && detail::growth_slope(r.xi, k2e) <= g &&
      detail::growth_slope(r.xi, k1m) <= g && detail::growth_slope(r.xi, k2m) <= g;

  r.ratio_slope = numerics::loglog_slope(r.xi, r.ratio);
  r.decrease_factor = r.ratio.front() / r.ratio.back();
  r.ratio_monotone = true;
  for (std::size_t i = 1; i < r.ratio.size(); ++i)
    if (r.ratio[i] > r.ratio[i - 1] * (1 + 1e-9)) r.ratio_monotone = false;
  r.little_o = r.ratio_monotone && r.decrease_factor >= 2;
  r.big_o = r.ratio_slope <= g;

  // subadditivity on random signed 1D frequency pairs
  std::mt19937_64 gen(opt.seed);
  std::uniform_real_distribution<double> U(0, 1);
  const double lo = std::log(xi_grid.front()), hi = std::log(xi_grid.back());
  const double floor_mag = std::max(2.0, ps.zones.M_cut);
  auto br = [](double v) { return std::sqrt(1 + v * v); };
  r.pairs = opt.pair_samples;
  for (int i = 0; i < opt.pair_samples; ++i) {
    const double a = std::exp(lo + (hi - lo) * U(gen)) * (U(gen) < 0.5 ? -1 : 1);
    const double b = std::exp(lo + (hi - lo) * U(gen)) * (U(gen) < 0.5 ? -1 : 1);
    const double xa = br(a), xb = br(b), xs = br(a + b);
    if (xs < floor_mag) {  // trivially below both sides by monotonicity
      ++r.pairs_skipped;
      continue;
    }
    if (ps.eta(xs) > (ps.eta(xa) + ps.eta(xb)) * (1 + 1e-12)) ++r.subadd_violations_eta;
    if (Mf(xs) > (Mf(xa) + Mf(xb)) * (1 + 1e-12)) ++r.subadd_violations_M;
  }
  return r;
}

enum class Verdict { GlobalWellPosed, LocalWellPosed, NotCovered };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::GlobalWellPosed: return "GlobalWellPosed";
    case Verdict::LocalWellPosed: return "LocalWellPosed";
    default: return "NotCovered";
  }
}

struct Check {
  std::string name;
  bool pass = false;
  nlohmann::ordered_json evidence;
};

struct Classification {
  Verdict verdict = Verdict::NotCovered;
  std::vector<Check> checks;
  std::vector<std::string> failing() const {
    std::vector<std::string> f;
    for (const auto& c : checks)
      if (!c.pass) f.push_back(c.name);
    return f;
  }
};

struct ClassifyOptions {
  double xi_min = 1e2;
  double xi_max = 1e8;
  int xi_points = 25;
  int shape_points = 100;
  EtaOptions eta;
};

inline Classification classify(const ProblemSpec& ps, const ClassifyOptions& opt = {}) {
  using J = nlohmann::ordered_json;
  Classification c;
  const auto grid = numerics::logspace(opt.xi_min, opt.xi_max, opt.xi_points);
  auto guarded = [&](const std::string& name, auto&& body) {
    Check ch;
    ch.name = name;
    try {
      body(ch);
    } catch (const std::exception& e) {
      ch.pass = false;
      ch.evidence = J{{"error", e.what()}};
    }
    c.checks.push_back(std::move(ch));
  };
  const auto& lw = ps.lw;
  const int m = lw.m();

  guarded("levi_parameters", [&](Check& ch) {
    if (lw.is_custom()) {
      ch.pass = true;
      ch.evidence = J{{"custom_weight", lw.custom_name()}};
      return;
    }
    const double need = m / (m - 1.0);
    ch.pass = lw.s() > need;
    ch.evidence = J{{"s", lw.s()}, {"m_over_m_minus_1", need}};
  });

  guarded("shape_conditions", [&](Check& ch) {
    double s = lw.s();
    if (lw.is_custom()) {
      // effective s from the steepest decay of w^m on the zone range
      double p = 0;
      for (double x : grid)
        p = std::max(p, -lw.elasticity_u(t_xi(lw, ps.zones, x).log_Lambda));
      s = p > 1 ? p / (p - 1) : 1e300;
    }
    const double T = lw.shape().T();
    const auto rep = check_shape_conditions(
        lw.shape(), s, m, numerics::logspace(T * 1e-3, T, opt.shape_points));
    ch.pass = rep.pass;
    ch.evidence = J{{"c0", rep.c0}, {"c", rep.c}, {"threshold", rep.threshold},
                    {"k2_ratio", rep.k2_ratio}, {"derivative_orders_checked", 2}};
  });

  guarded("A9", [&](Check& ch) {
    const auto rep = check_A9(lw, default_a9_grid(lw));
    ch.pass = rep.holds;
    ch.evidence = J{{"net_exponent", std::isfinite(rep.net_exponent) ? J(rep.net_exponent) : J()},
                    {"monotone", rep.monotone},
                    {"log_drop", rep.drop}};
  });

  guarded("prop43", [&](Check& ch) {
    const auto rep = verify_prop43(lw, ps.zones, grid, opt.eta.workers);
    ch.pass = rep.pass();
    ch.evidence = J{{"item_i", rep.pass_i}, {"item_ii", rep.pass_ii},
                    {"item_iii", rep.pass_iii},
                    {"max_item_ii", rep.max_item_ii},
                    {"slope_ratio_first", rep.slope_ratio_first},
                    {"slope_ratio_second", rep.slope_ratio_second}};
  });

  guarded("A7", [&](Check& ch) {
    const auto rep = check_A7(ps.ws, ps.eta, ps.eta.delta0(), grid);
    ch.pass = rep.pass;
    ch.evidence = J{{"max_slack", rep.max_slack}, {"slack_slope", rep.slack_slope},
                    {"inconclusive", rep.inconclusive}};
  });

  EtaReport eta_rep;
  bool eta_ok = false;
  guarded("eta_admissible", [&](Check& ch) {
    eta_rep = check_eta_admissible(ps, EtaMode::Big_O, grid, opt.eta);
    eta_ok = true;
    ch.pass = eta_rep.pass(EtaMode::Big_O);
    ch.evidence = J{{"little_o", eta_rep.little_o},
                    {"big_o", eta_rep.big_o},
                    {"decrease_factor", eta_rep.decrease_factor},
                    {"ratio_slope", eta_rep.ratio_slope},
                    {"subadd_violations_eta", eta_rep.subadd_violations_eta},
                    {"subadd_violations_M", eta_rep.subadd_violations_M},
                    {"derivatives_bounded", eta_rep.derivatives_bounded},
                    {"k1_eta", eta_rep.k1_eta}, {"k2_eta", eta_rep.k2_eta},
                    {"k1_M", eta_rep.k1_M}, {"k2_M", eta_rep.k2_M}};
  });

  const bool all = c.failing().empty();
  if (all && eta_ok && eta_rep.pass(EtaMode::Little_o))
    c.verdict = Verdict::GlobalWellPosed;
  else if (all)
    c.verdict = Verdict::LocalWellPosed;
  else
    c.verdict = Verdict::NotCovered;
  return c;
}

}  // namespace hypwp
