#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "hypwp/analysis.hpp"
#include "hypwp/levi_weight.hpp"
#include "hypwp/numerics.hpp"
#include "hypwp/spectral.hpp"

namespace hypwp {

struct ConjugatorConfig {
  explicit ConjugatorConfig(ProblemSpec p) : ps(std::move(p)) {}

  std::array<double, 7> Mt{1, 1, 1, 1, 1, 1, 1};
  double M8 = 1;
  double kappa = 1;
  ProblemSpec ps;
  double t1 = std::numeric_limits<double>::quiet_NaN();  // NaN: Lambda(t1) = e^{-1}, capped at T
  double s = std::numeric_limits<double>::quiet_NaN();   // NaN: the LeviWeight's s

  double T() const { return ps.lw.shape().T(); }
  double s_exp() const { return std::isnan(s) ? ps.lw.s() : s; }
  void validate() const {
    for (double v : Mt)
      if (!(v >= 0) || !std::isfinite(v)) throw DomainError("conjugator constants must be finite and >= 0");
    if (!(M8 >= 0) || !std::isfinite(M8)) throw DomainError("M8 must be finite and >= 0");
    if (!(kappa > 0) || kappa > 1) throw DomainError("kappa must lie in (0, 1] so kappa T <= T");
    if (!(s_exp() > 1)) throw DomainError("conjugator exponent needs s > 1");
  }
};

inline double default_t1(const ConjugatorConfig& cfg) {
  if (!std::isnan(cfg.t1)) return cfg.t1;
  const auto& sh = cfg.ps.lw.shape();
  const double T = cfg.T();
  if (sh.log_Lambda(std::log(T)) <= -1) return T;
  return numerics::bisect_decreasing(
             [&](double t) { return -1 - sh.log_Lambda(std::log(t)); }, 1e-300, T, 1e-15 * T)
      .root;
}

namespace detail {

// chi at <xi>/(N w^m(t)); 1 at t = 0
inline double phi_chi(const LeviWeight& lw, const ZonePartition& z, double t, double xb) {
  if (t <= 0) return 1.0;
  return cutoff_chi(std::exp(std::log(xb) - std::log(z.N) - lw.log_wm(t)));
}

inline double phi_chi_tilde(const LeviWeight& lw, const ZonePartition& z, double t, double xb) {
  if (t <= 0) return 0.0;
  return cutoff_chi_tilde(std::exp(std::log(xb) - std::log(z.N) - lw.log_wm(t)));
}

// int_a^b f; tanh-sinh in t from 0, in log t otherwise
template <class F>
double seg_int(F&& f, double a, double b) {
  if (!(b > a)) return 0.0;
  if (a == 0) return numerics::integrate_endpoint(f, a, b, 1e-10, 1e-13);
  return numerics::integrate_endpoint(
      [&](double v) {
        const double t = std::exp(v);
        return f(t) * t;
      },
      std::log(a), std::log(b), 1e-10, 1e-13);
}

// integral over [0, t0] split where the cutoff switches
template <class F>
double zone_int(F&& f, double t0, const std::vector<double>& cuts) {
  double s = 0, a = 0;
  for (double c : cuts) {
    if (c >= t0) break;
    if (c > a) {
      s += seg_int(f, a, c);
      a = c;
    }
  }
  return s + seg_int(f, a, t0);
}

}  // namespace detail

struct PhiAddends {
  std::array<double, 8> v{};
  double sum() const {
    double s = 0;
    for (double x : v) s += x;
    return s;
  }
};

// Cutoff switch times: chi = 1 up to t_xi(<xi>), chi = 0 past t_xi(<xi>/2).
inline std::vector<double> phi_cuts(const ConjugatorConfig& cfg, double xb) {
  std::vector<double> c;
  if (xb > 1) c.push_back(t_xi(cfg.ps.lw, cfg.ps.zones, xb).t);
  if (xb / 2 > 1) c.push_back(t_xi(cfg.ps.lw, cfg.ps.zones, xb / 2).t);
  std::sort(c.begin(), c.end());
  return c;
}

inline PhiAddends phi_addends(const ConjugatorConfig& cfg, double t0, double xb) {
  cfg.validate();
  const auto& lw = cfg.ps.lw;
  const auto& z = cfg.ps.zones;
  const double T = cfg.T();
  if (t0 < 0 || t0 > T) throw DomainError("t0 outside [0, T]");
  if (!(xb > z.M_cut)) throw DomainError("phi needs <xi> > M_cut");
  const auto cuts = phi_cuts(cfg, xb);
  const auto& sh = lw.shape();
  const double phi = cfg.ps.mu.phi(xb);
  auto chi = [&](double t) { return detail::phi_chi(lw, z, t, xb); };
  PhiAddends r;
  const auto& M = cfg.Mt;
  r.v[0] = M[0] * detail::zone_int([&](double t) { return rho(lw, t, xb) * chi(t); }, t0, cuts);
  r.v[1] = M[1] * detail::zone_int(
                      [&](double t) {
                        const double c = chi(t);
                        return c > 0 ? drho_dt(lw, t, xb) / rho(lw, t, xb) * c : 0.0;
                      },
                      t0, cuts);
  // the remaining integrands vanish before t_xi
  auto tail = [&](auto&& f) { return detail::zone_int(f, t0, cuts); };
  auto ct = [&](double t) { return detail::phi_chi_tilde(lw, z, t, xb); };
  r.v[2] = M[2] * tail([&](double t) {
    const double c = ct(t);
    return c > 0 ? std::exp(sh.log_lambda(std::log(t)) + lw.log_wm(t)) * c : 0.0;
  });
  const double lam_int = tail([&](double t) {
    const double c = ct(t);
    return c > 0 ? sh.lambda(t) * c : 0.0;
  });
  r.v[3] = M[3] * phi * lam_int;
  r.v[4] = M[4] * tail([&](double t) {
    const double c = ct(t);
    return c > 0 ? sh.lambda_over_Lambda(t) * c : 0.0;
  });
  r.v[5] = M[5] * lam_int;
  r.v[6] = M[6] * phi * tail([&](double t) { return ct(t); });
  r.v[7] = -cfg.M8 * (T - cfg.kappa * t0) * std::pow(xb, 1 / cfg.s_exp());
  return r;
}

// int_0^{t1} lambda w^m (1 - chi) dt, the majorant for addend 5
inline double addend5_majorant(const ConjugatorConfig& cfg, double t1, double xb) {
  const auto& lw = cfg.ps.lw;
  const auto cuts = phi_cuts(cfg, xb);
  return detail::zone_int(
      [&](double t) {
        const double c = detail::phi_chi_tilde(lw, cfg.ps.zones, t, xb);
        return c > 0 ? std::exp(lw.shape().log_lambda(std::log(t)) + lw.log_wm(t)) * c : 0.0;
      },
      t1, cuts);
}

struct PhiReport {
  std::vector<double> xi_grid, t0_grid;
  double t1 = 0;
  // per-xi maxima over t0 and their log-log trends
  std::vector<double> c2_by_xi, c6_by_xi, c5_by_xi, gap_by_xi;
  double c2 = 0, c6 = 0, c5 = 0;
  double c2_slope = 0, c6_slope = 0, c5_slope = 0;
  double reduced_gap = 0, gap_slope = 0;
  double monotone_threshold = 0;  // smallest M8 kappa making Phi non-decreasing on the grid
  double trend_tolerance = 0.05;
  bool pass_c2 = false, pass_c6 = false, pass_c5 = false, pass_gap = false;
  bool pass() const { return pass_c2 && pass_c6 && pass_c5 && pass_gap; }
};

// Reduced exponent from addends {1,2,3,4,8}; constants fold in the three bounds.
inline double reduced_phi(const ConjugatorConfig& cfg, const PhiAddends& a, double t0, double xb,
                          double c2, double c5) {
  const auto& lw = cfg.ps.lw;
  const double chi0 = detail::phi_chi(lw, cfg.ps.zones, t0, xb);
  const double M2 = cfg.Mt[1] * c2;
  const double I3 = cfg.Mt[2] > 0 ? a.v[2] / cfg.Mt[2] : 0.0;
  const double M3 = cfg.Mt[2] + cfg.Mt[4] * c5;
  const double M4 = cfg.Mt[3] * std::exp(lw.shape().log_Lambda(std::log(cfg.T()))) +
                    cfg.Mt[6] * cfg.T();
  return a.v[0] + M2 * std::log(xb) * chi0 + M3 * I3 + M4 * cfg.ps.mu.phi(xb) * detail::phi_chi_tilde(lw, cfg.ps.zones, t0, xb) +
         a.v[7];
}

inline PhiReport verify_phi_reduction(const ConjugatorConfig& cfg, const std::vector<double>& xi_grid,
                                      const std::vector<double>& t0_grid, int workers = 1) {
  cfg.validate();
  PhiReport rep;
  rep.xi_grid = xi_grid;
  rep.t0_grid = t0_grid;
  rep.t1 = default_t1(cfg);
  struct Col {
    std::vector<PhiAddends> a;
    double c2 = 0, c6 = 0, c5 = 0, thr = 0;
  };
  const double s = cfg.s_exp();
  auto cols = numerics::parallel_map(xi_grid.size(), workers, [&](std::size_t i) {
    const double xb = xi_grid[i];
    Col c;
    const double maj = addend5_majorant(cfg, rep.t1, xb);
    for (double t0 : t0_grid) {
      c.a.push_back(phi_addends(cfg, t0, xb));
      const auto& v = c.a.back().v;
      if (cfg.Mt[1] > 0) c.c2 = std::max(c.c2, v[1] / cfg.Mt[1] / std::log(xb));
      if (cfg.Mt[5] > 0) c.c6 = std::max(c.c6, v[5] / cfg.Mt[5]);
      if (cfg.Mt[4] > 0) c.c5 = std::max(c.c5, v[4] / cfg.Mt[4] / (maj + 1));
    }
    for (std::size_t k = 1; k < t0_grid.size(); ++k) {
      double d = 0;
      for (int j = 0; j < 7; ++j) d += c.a[k].v[j] - c.a[k - 1].v[j];
      const double need = -d / ((t0_grid[k] - t0_grid[k - 1]) * std::pow(xb, 1 / s));
      c.thr = std::max(c.thr, need);
    }
    return c;
  });
  for (auto& c : cols) {
    rep.c2_by_xi.push_back(c.c2);
    rep.c6_by_xi.push_back(c.c6);
    rep.c5_by_xi.push_back(c.c5);
    rep.c2 = std::max(rep.c2, c.c2);
    rep.c6 = std::max(rep.c6, c.c6);
    rep.c5 = std::max(rep.c5, c.c5);
    rep.monotone_threshold = std::max(rep.monotone_threshold, c.thr);
  }
  for (std::size_t i = 0; i < xi_grid.size(); ++i) {
    double g = -numerics::kInf;
    for (std::size_t k = 0; k < t0_grid.size(); ++k) {
      const auto& a = cols[i].a[k];
      g = std::max(g, a.sum() - reduced_phi(cfg, a, t0_grid[k], xi_grid[i], rep.c2, rep.c5));
    }
    rep.gap_by_xi.push_back(g);
    rep.reduced_gap = std::max(rep.reduced_gap, g);
  }
  auto slope = [&](const std::vector<double>& y) {
    std::vector<double> p;
    for (double v : y) p.push_back(std::max(v, 0.0) + 1);  // shift keeps logs finite
    return numerics::loglog_slope(xi_grid, p);
  };
  rep.c2_slope = slope(rep.c2_by_xi);
  rep.c6_slope = slope(rep.c6_by_xi);
  rep.c5_slope = slope(rep.c5_by_xi);
  rep.gap_slope = slope(rep.gap_by_xi);
  const double tol = rep.trend_tolerance;
  rep.pass_c2 = std::isfinite(rep.c2) && rep.c2_slope <= tol;
  rep.pass_c6 = std::isfinite(rep.c6) && rep.c6_slope <= tol;
  rep.pass_c5 = std::isfinite(rep.c5) && rep.c5_slope <= tol;
  rep.pass_gap = std::isfinite(rep.reduced_gap) && rep.gap_slope <= tol;
  return rep;
}

}  // namespace hypwp
