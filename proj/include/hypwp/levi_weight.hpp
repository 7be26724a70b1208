#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "hypwp/errors.hpp"
#include "hypwp/numerics.hpp"
#include "hypwp/shape.hpp"

namespace hypwp {

// A weight given through u = log Lambda: log(w^m)(u) and its u-derivative.
struct WeightProfile {
  std::string name;
  std::function<double(double)> log_wm;
  std::function<double(double)> dlog_wm;
};

// w^m = Lambda^{-s/(s-1)} (log^[m~](1/Lambda))^{beta~}, or a custom profile.
class LeviWeight {
 public:
  LeviWeight(int m, double s, int m_tilde, double beta_tilde,
             ShapeFunction shape)
      : m_(m), s_(s), m_tilde_(m_tilde), beta_(beta_tilde),
        shape_(std::move(shape)) {
    if (m < 2) throw DomainError("order m must be >= 2");
    if (!(s > 1) || !std::isfinite(s))
      throw DomainError("Gevrey parameter s must exceed 1");
    if (m_tilde < 0) throw DomainError("iterated-log depth must be >= 0");
    if (beta_tilde != 0 && m_tilde < 1)
      throw DomainError("beta_tilde != 0 needs m_tilde >= 1");
  }

  static LeviWeight custom(int m, WeightProfile profile, ShapeFunction shape) {
    LeviWeight lw(m, 2.0, 0, 0.0, std::move(shape));
    lw.s_ = std::numeric_limits<double>::quiet_NaN();
    lw.profile_ = std::move(profile);
    lw.custom_ = true;
    return lw;
  }

  // w^m = Lambda^{-1} (log 1/Lambda)^2, the borderline weight with
  // generated loss (log <xi>)^2.
  static LeviWeight log_squared(int m, ShapeFunction shape) {
    WeightProfile p{"log_squared",
                    [](double u) {
                      if (!(u < 0))
                        throw DomainError("log(1/Lambda) must be positive");
                      return -u + 2 * std::log(-u);
                    },
                    [](double u) { return -1 + 2 / u; }};
    return custom(m, std::move(p), std::move(shape));
  }

  int m() const { return m_; }
  double s() const { return s_; }
  int m_tilde() const { return m_tilde_; }
  double beta_tilde() const { return beta_; }
  const ShapeFunction& shape() const { return shape_; }
  bool is_custom() const { return custom_; }
  const std::string& custom_name() const { return profile_.name; }
  double p() const { return s_ / (s_ - 1); }

  // log w^m at u = log Lambda.
  double log_wm_u(double u) const {
    if (custom_) return profile_.log_wm(u);
    double v = -p() * u;
    if (beta_ != 0) {
      double L = -u;
      check_level(L, 1);
      for (int k = 2; k <= m_tilde_; ++k) {
        L = std::log(L);
        check_level(L, k);
      }
      v += beta_ * std::log(L);
    }
    return v;
  }

  // d log w^m / d log Lambda.
  double elasticity_u(double u) const {
    if (custom_) return profile_.dlog_wm(u);
    double e = -p();
    if (beta_ != 0) {
      double L = -u, dL = -1;
      for (int k = 2; k <= m_tilde_; ++k) {
        dL /= L;
        L = std::log(L);
      }
      check_level(L, m_tilde_);
      e += beta_ * dL / L;
    }
    return e;
  }

  double log_Lambda(double t) const { return shape_.log_Lambda(std::log(t)); }
  double log_wm(double t) const { return log_wm_u(log_Lambda(t)); }
  double wm(double t) const { return std::exp(log_wm(t)); }
  double w(double t) const { return std::exp(log_wm(t) / m_); }

  // d/dt log w^m = elasticity * lambda/Lambda.
  double dlog_wm_dt(double t) const {
    const double lt = std::log(t);
    const double u = shape_.log_Lambda(lt);
    return elasticity_u(u) * std::exp(shape_.log_lambda(lt) - u);
  }

  // int_{-inf}^{u0} exp(u + a log w^m(u)) du, i.e. int_0^{Lambda} w^{ma} dLambda.
  double integrate_power_below(double a, double u0, double rel_tol = 1e-12) const {
    auto g = [&](double u) { return u + a * log_wm_u(u); };
    const double g0 = g(u0);
    return std::exp(g0) * numerics::integrate_half_line(
                              [&](double v) { return std::exp(g(u0 - v) - g0); },
                              rel_tol);
  }

  // Same integrand over [u1, u2].
  double integrate_power_between(double a, double u1, double u2,
                                 double rel_tol = 1e-12) const {
    auto g = [&](double u) { return u + a * log_wm_u(u); };
    const double g1 = g(u1);
    return std::exp(g1) * numerics::integrate(
                              [&](double u) { return std::exp(g(u) - g1); }, u1,
                              u2, rel_tol);
  }

  // W = int_0^Lambda w dLambda' at u = log Lambda.
  double W_u(double u) const {
    if (!custom_) {
      if (!(s_ > m_ / (m_ - 1.0)))
        throw DomainError("W diverges: needs s > m/(m-1)");
      if (beta_ == 0) {
        const double e = 1 - p() / m_;
        return std::exp(e * u) / e;
      }
    }
    return integrate_power_below(1.0 / m_, u);
  }

  double W(double t) const {
    if (t == 0) return 0.0;
    return W_u(log_Lambda(t));
  }

  // Net exponent of lambda^m w^{m(m-1)} at t -> 0 where known symbolically:
  // in powers of t for Monomial, in powers of t^{-r} (negated) for
  // ExponentialFlat. Positive means the product vanishes at 0.
  double a9_net_exponent() const {
    if (custom_) return std::numeric_limits<double>::quiet_NaN();
    const double l = shape_.parameter();
    switch (shape_.kind()) {
      case ShapeKind::Monomial:
        return m_ * l - (m_ - 1) * p() * (l + 1);
      case ShapeKind::ExponentialFlat:
        return m_ - (m_ - 1) * p();
      default:
        return std::numeric_limits<double>::quiet_NaN();
    }
  }

  // Whether lambda^m w^{m(m-1)} -> 0 as t -> 0.
  bool a9_limit_zero() const {
    const double e = a9_net_exponent();
    if (std::isfinite(e)) {
      if (e != 0) return e > 0;
      return (m_ - 1) * beta_ < 0;
    }
    auto P = [&](double lt) {
      return m_ * shape_.log_lambda(lt) +
             (m_ - 1) * log_wm_u(shape_.log_Lambda(lt));
    };
    const double lt0 = std::log(shape_.T());
    const double a = P(lt0 - 100), b = P(lt0 - 200);
    return b < a && b < -20;
  }

 private:
  static void check_level(double L, int level) {
    if (!(L > 0))
      throw DomainError("iterated log level " + std::to_string(level) +
                        " is not positive (value " + numerics::fmt17(L) + ")");
  }

  int m_;
  double s_;
  int m_tilde_;
  double beta_;
  ShapeFunction shape_;
  bool custom_ = false;
  WeightProfile profile_;
};

struct ZonePartition {
  double N = 1.0;
  double M_cut = 2.0;

  void validate() const {
    if (!(N > 0)) throw DomainError("zone constant N must be positive");
    if (!(M_cut >= 1)) throw DomainError("cutoff M_cut must be >= 1");
  }
};

enum class Zone { Pd, Hyp, Overlap2N, BelowCutoff };

inline const char* zone_name(Zone z) {
  switch (z) {
    case Zone::Pd: return "Pd";
    case Zone::Hyp: return "Hyp";
    case Zone::Overlap2N: return "Overlap2N";
    default: return "BelowCutoff";
  }
}

struct TXi {
  double t = 0;
  double log_Lambda = 0;
  bool clamped = false;
  double residual = 0;  // |N w^m(t) - <xi>| / <xi>
  int iterations = 0;
};

// Solves N w(Lambda(t))^m = <xi> by bisection on t in (0, T].
inline TXi t_xi(const LeviWeight& lw, const ZonePartition& z, double xi) {
  z.validate();
  const double T = lw.shape().T();
  const double lN = std::log(z.N), lx = std::log(xi);
  auto g = [&](double t) { return lN + lw.log_wm(t) - lx; };
  TXi r;
  if (g(T) >= 0) {
    r.t = T;
    r.clamped = true;
  } else {
    double lo = T / 2;
    int guard = 0;
    while (g(lo) <= 0) {
      lo /= 2;
      if (++guard > 1070 || lo == 0)
        throw NumericalError("no bracket for t_xi at <xi> = " +
                                 numerics::fmt17(xi),
                             numerics::kInf);
    }
    const auto b = numerics::bisect_decreasing(g, lo, std::min(2 * lo, T),
                                               1e-14 * T);
    r.t = b.root;
    r.iterations = b.iterations;
  }
  r.log_Lambda = lw.log_Lambda(r.t);
  r.residual = std::fabs(std::expm1(g(r.t)));
  return r;
}

// rho^m = 1 + <xi> lambda^m w^{m(m-1)}; q is the second addend.
inline double rho_q(const LeviWeight& lw, double t, double xi) {
  if (t == 0) {
    if (!lw.a9_limit_zero())
      throw DomainError(
          "rho at t = 0 undefined: condition A9 (lambda^m w^{m(m-1)} -> 0) "
          "fails");
    return 0.0;
  }
  const double lt = std::log(t);
  const int m = lw.m();
  return std::exp(std::log(xi) + m * lw.shape().log_lambda(lt) +
                  (m - 1) * lw.log_wm_u(lw.shape().log_Lambda(lt)));
}

inline double rho(const LeviWeight& lw, double t, double xi) {
  return std::pow(1 + rho_q(lw, t, xi), 1.0 / lw.m());
}

// d/dt log q, analytic.
inline double dlog_q_dt(const LeviWeight& lw, double t) {
  return lw.m() * lw.shape().dlog_lambda(t) + (lw.m() - 1) * lw.dlog_wm_dt(t);
}

inline double drho_dt(const LeviWeight& lw, double t, double xi) {
  if (t == 0) return 0.0;
  const double q = rho_q(lw, t, xi);
  return rho(lw, t, xi) * q / (1 + q) * dlog_q_dt(lw, t) / lw.m();
}

inline Zone zone_of(const LeviWeight& lw, const ZonePartition& z, double t,
                    double xi) {
  if (xi <= z.M_cut) return Zone::BelowCutoff;
  if (t == 0) return Zone::Pd;
  const double nw = z.N * lw.wm(t);
  if (xi <= nw) return Zone::Pd;
  if (xi >= 2 * nw) return Zone::Hyp;
  return Zone::Overlap2N;
}

struct BoundaryRow {
  double xi = 0, t_xi = 0, Lambda_t_xi = 0, w_at_t_xi = 0, W_at_t_xi = 0,
         rho_boundary = 0;
  bool clamped = false;
};

inline BoundaryRow boundary_row(const LeviWeight& lw, const ZonePartition& z,
                                double xi) {
  const TXi tx = t_xi(lw, z, xi);
  BoundaryRow r;
  r.xi = xi;
  r.t_xi = tx.t;
  r.Lambda_t_xi = std::exp(tx.log_Lambda);
  r.w_at_t_xi = std::exp(lw.log_wm_u(tx.log_Lambda) / lw.m());
  r.W_at_t_xi = lw.W_u(tx.log_Lambda);
  r.rho_boundary = rho(lw, tx.t, xi);
  r.clamped = tx.clamped;
  return r;
}

struct Prop43Row {
  double xi = 0, t_xi = 0, bound = 0, first_integral = 0, second_integral = 0,
         ratio_first = 0, ratio_second = 0;
  double item_i = 0;   // w^m Lambda at t_xi
  double item_ii = 0;  // -d_t w * m Lambda / (lambda w), finite differences
};

struct Prop43Report {
  std::vector<Prop43Row> rows;
  double min_item_i = 0, slope_item_i = 0;
  double min_item_ii = 0, max_item_ii = 0, slope_item_ii = 0;
  double max_ratio_first = 0, max_ratio_second = 0;
  double slope_ratio_first = 0, slope_ratio_second = 0;
  bool pass_i = false, pass_ii = false, pass_iii = false;
  double trend_tolerance = 0.05;
  bool pass() const { return pass_i && pass_ii && pass_iii; }
};

inline Prop43Row prop43_row(const LeviWeight& lw, const ZonePartition& z,
                            double xi) {
  const int m = lw.m();
  const TXi tx = t_xi(lw, z, xi);
  const double u = tx.log_Lambda;
  const double uT = lw.log_Lambda(lw.shape().T());
  Prop43Row r;
  r.xi = xi;
  r.t_xi = tx.t;
  r.bound = lw.W_u(u) * std::exp(lw.log_wm_u(u) * (m - 1.0) / m);
  r.first_integral =
      std::pow(xi, 1.0 / m) * lw.integrate_power_below((m - 1.0) / m, u);
  r.second_integral = u < uT ? lw.integrate_power_between(1.0, u, uT) : 0.0;
  r.ratio_first = r.first_integral / r.bound;
  r.ratio_second = r.second_integral / r.bound;
  r.item_i = std::exp(lw.log_wm_u(u) + u);
  // central difference of log w^m in t
  const double t = tx.t, h = t * 1e-5;
  const double tp = std::min(t + h, lw.shape().T()), tm = t - h;
  const double dlog = (lw.log_wm(tp) - lw.log_wm(tm)) / (tp - tm);
  r.item_ii = -dlog / lw.shape().lambda_over_Lambda(t);
  return r;
}

inline Prop43Report verify_prop43(const LeviWeight& lw, const ZonePartition& z,
                                  const std::vector<double>& xi_grid,
                                  int workers = 1) {
  Prop43Report rep;
  auto rows = numerics::parallel_map(xi_grid.size(), workers, [&](std::size_t i) {
    if (!(xi_grid[i] > z.M_cut))
      throw DomainError("Prop 4.3 grid must lie above the cutoff");
    return prop43_row(lw, z, xi_grid[i]);
  });
  rep.rows = rows;
  std::vector<double> xs, r1, r2, lam_i, v_i, lam_ii, v_ii;
  rep.min_item_i = rep.min_item_ii = numerics::kInf;
  for (const auto& r : rows) {
    xs.push_back(r.xi);
    r1.push_back(r.ratio_first);
    r2.push_back(r.ratio_second);
    const double L = std::exp(lw.log_Lambda(r.t_xi));
    if (L <= 1e-2) {
      lam_i.push_back(L);
      v_i.push_back(r.item_i);
      rep.min_item_i = std::min(rep.min_item_i, r.item_i);
    }
    lam_ii.push_back(L);
    v_ii.push_back(r.item_ii);
    rep.min_item_ii = std::min(rep.min_item_ii, r.item_ii);
    rep.max_item_ii = std::max(rep.max_item_ii, r.item_ii);
    rep.max_ratio_first = std::max(rep.max_ratio_first, r.ratio_first);
    rep.max_ratio_second = std::max(rep.max_ratio_second, r.ratio_second);
  }
  const double tol = rep.trend_tolerance;
  rep.slope_item_i = lam_i.size() >= 2 ? numerics::loglog_slope(lam_i, v_i) : 0;
  rep.pass_i = lam_i.size() >= 2 && rep.min_item_i > 0 && rep.slope_item_i <= tol;
  rep.slope_item_ii = numerics::loglog_slope(lam_ii, v_ii);
  rep.pass_ii = rep.min_item_ii > 0 && std::isfinite(rep.max_item_ii) &&
                std::fabs(rep.slope_item_ii) <= tol;
  rep.slope_ratio_first = numerics::loglog_slope(xs, r1);
  rep.slope_ratio_second = numerics::loglog_slope(xs, r2);
  rep.pass_iii = std::fabs(rep.slope_ratio_first) <= tol &&
                 std::fabs(rep.slope_ratio_second) <= tol;
  return rep;
}

struct RhoMonotoneReport {
  int points = 0;
  double min_drho_over_rho = numerics::kInf;  // finite-difference d_t rho / rho
  double max_bound_ratio = 0;  // (d_t rho / rho) / (q lambda / Lambda)
  double min_rho = numerics::kInf;
  bool pass_i = false, pass_ii = false;
  bool pass() const { return pass_i && pass_ii; }
};

// d_t rho >= 0 and d_t rho / rho <= <xi> lambda^m (lambda/Lambda) w^{m(m-1)},
// both by central differences of log q (differencing rho loses q << 1 to roundoff).
inline RhoMonotoneReport verify_rho_monotone(const LeviWeight& lw, const std::vector<double>& t_grid,
                                    const std::vector<double>& xi_grid, int workers = 1) {
  struct Col {
    double mn = numerics::kInf, mx = 0, rmin = numerics::kInf;
  };
  const double T = lw.shape().T();
  auto cols = numerics::parallel_map(xi_grid.size(), workers, [&](std::size_t i) {
    Col c;
    const double xi = xi_grid[i];
    for (double t : t_grid) {
      if (!(t > 0) || t > T) throw DomainError("rho check grid needs t in (0, T]");
      const double h = t * 1e-6;
      const double a = std::max(t - h, t * 0.5), b = std::min(t + h, T);
      const double dlq = (std::log(rho_q(lw, b, xi)) - std::log(rho_q(lw, a, xi))) / (b - a);
      const double q = rho_q(lw, t, xi);
      const double dl = q / (1 + q) * dlq / lw.m();
      c.mn = std::min(c.mn, dl);
      c.mx = std::max(c.mx, dl / (q * lw.shape().lambda_over_Lambda(t)));
      c.rmin = std::min(c.rmin, rho(lw, t, xi));
    }
    return c;
  });
  RhoMonotoneReport r;
  r.points = static_cast<int>(t_grid.size() * xi_grid.size());
  for (auto& c : cols) {
    r.min_drho_over_rho = std::min(r.min_drho_over_rho, c.mn);
    r.max_bound_ratio = std::max(r.max_bound_ratio, c.mx);
    r.min_rho = std::min(r.min_rho, c.rmin);
  }
  r.pass_i = r.min_drho_over_rho >= -1e-12 && r.min_rho >= 1;
  r.pass_ii = r.max_bound_ratio <= 1 + 1e-6;
  return r;
}

}  // namespace hypwp
