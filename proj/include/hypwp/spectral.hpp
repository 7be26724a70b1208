#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/numeric/odeint.hpp>

#include "hypwp/analysis.hpp"
#include "hypwp/errors.hpp"
#include "hypwp/levi_weight.hpp"
#include "hypwp/mollify.hpp"
#include "hypwp/moduli.hpp"
#include "hypwp/numerics.hpp"

namespace hypwp {

using cdouble = std::complex<double>;
using SmallMatrix = Eigen::Matrix<cdouble, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;

// lambda^{m-j} a(t) xi^{m-j} D_t^j u
struct PrincipalTerm {
  int j = 0;
  TimeCoefficient a;
};

// factor * b(t) xi^gamma D_t^j u, with j + gamma < m
struct LowerTerm {
  int j = 0;
  int gamma = 0;
  cdouble factor{1.0, 0.0};
  TimeCoefficient b;
};

struct LeviAudit {
  double C = 0;  // max |b| / (lambda^{m-j} w^{m(m-j-gamma)}) over the samples
  std::vector<double> per_term;
};

struct ModelProblem {
  int m = 2;
  std::vector<PrincipalTerm> principal;
  std::vector<LowerTerm> lower;
  LeviWeight lw{2, 3.0, 0, 0.0, ShapeFunction::monomial(4)};
  ZonePartition zones;
  Modulus mu = Modulus::lipschitz();
  MollifierKernel kernel = MollifierKernel::bump();
  // chi == 0 everywhere and lambda == 1: the strictly hyperbolic sanity case
  bool lambda_one = false;
  LeviAudit audit;

  double T() const { return lw.shape().T(); }
};

// 1 on [0,1], 0 on [2,inf), 1 - S(x-1) between; S(y) = y^4(35 - 84y + 70y^2 - 20y^3).
inline double cutoff_chi(double x) {
  if (x <= 1) return 1.0;
  if (x >= 2) return 0.0;
  const double y = x - 1;
  return 1 - y * y * y * y * (35 + y * (-84 + y * (70 - 20 * y)));
}

// 1 - chi, evaluated without cancellation near the left end of the blend
inline double cutoff_chi_tilde(double x) {
  if (x <= 1) return 0.0;
  if (x >= 2) return 1.0;
  const double y = x - 1;
  return y * y * y * y * (35 + y * (-84 + y * (70 - 20 * y)));
}

inline double cutoff_dchi(double x) {
  if (x <= 1 || x >= 2) return 0.0;
  const double y = x - 1, z = 1 - y;
  return -140 * y * y * y * z * z * z;
}

// roots of tau^m = sum_j c_j tau^j, sorted by real part
inline std::vector<cdouble> companion_roots(const std::vector<cdouble>& c) {
  const int m = static_cast<int>(c.size());
  if (m == 1) return {c[0]};
  if (m == 2) {
    // tau^2 - c1 tau - c0 = 0
    const cdouble d = std::sqrt(c[1] * c[1] + 4.0 * c[0]);
    std::vector<cdouble> r{(c[1] - d) / 2.0, (c[1] + d) / 2.0};
    std::sort(r.begin(), r.end(), [](cdouble a, cdouble b) { return a.real() < b.real(); });
    return r;
  }
  Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(m, m);
  for (int i = 0; i + 1 < m; ++i) C(i, i + 1) = 1.0;
  for (int j = 0; j < m; ++j) C(m - 1, j) = c[j];
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(C, false);
  std::vector<cdouble> r(es.eigenvalues().data(), es.eigenvalues().data() + m);
  std::sort(r.begin(), r.end(), [](cdouble a, cdouble b) { return a.real() < b.real(); });
  return r;
}

namespace detail {

inline double real_roots_check(const std::vector<cdouble>& r, double scale) {
  double gap = numerics::kInf;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (std::fabs(r[i].imag()) > 1e-9 * scale) return -1;
    if (i) gap = std::min(gap, r[i].real() - r[i - 1].real());
  }
  return gap;
}

inline double coef_scale(const std::vector<cdouble>& c) {
  double s = 1;
  for (auto& x : c) s = std::max(s, std::abs(x));
  return s;
}

}  // namespace detail

// Checks strict hyperbolicity at lambda == 1 and audits the Levi bound.
inline void validate_model(ModelProblem& mp, int samples = 21) {
  if (mp.m != 2 && mp.m != 3) throw DomainError("model order m must be 2 or 3");
  if (mp.lw.m() != mp.m) throw DomainError("LeviWeight order differs from model order");
  mp.zones.validate();
  for (auto& p : mp.principal)
    if (p.j < 0 || p.j >= mp.m) throw DomainError("principal term needs 0 <= j < m");
  for (auto& l : mp.lower)
    if (l.j < 0 || l.gamma < 0 || l.j + l.gamma >= mp.m)
      throw DomainError("lower term needs j + gamma < m");
  const double T = mp.T();
  for (int i = 0; i < samples; ++i) {
    const double t = T * i / (samples - 1);
    std::vector<cdouble> c(mp.m, 0.0);
    for (auto& p : mp.principal) c[p.j] += p.a(t);
    const auto r = companion_roots(c);
    const double gap = detail::real_roots_check(r, detail::coef_scale(c));
    if (!(gap > 1e-9 * detail::coef_scale(c)))
      throw DomainError("principal part not strictly hyperbolic at t = " + numerics::fmt17(t));
  }
  mp.audit = {};
  for (auto& l : mp.lower) {
    double C = 0;
    for (int i = 1; i < samples; ++i) {
      const double t = T * i / (samples - 1);
      const double bound = (mp.m - l.j) * mp.lw.shape().log_lambda(std::log(t)) +
                           (mp.m - l.j - l.gamma) * mp.lw.log_wm(t);
      C = std::max(C, std::abs(l.factor * l.b(t)) * std::exp(-bound));
    }
    mp.audit.per_term.push_back(C);
    mp.audit.C = std::max(mp.audit.C, C);
  }
}

inline double japanese(double xi) { return std::sqrt(1 + xi * xi); }

struct HValue {
  double h = 1, dh = 0, chi = 1;
};

// h = rho chi + <xi> lambda (1 - chi), chi at <xi>/(N w^m)
inline HValue h_full(const ModelProblem& mp, double t, double xi) {
  const double xb = japanese(xi);
  HValue r;
  if (mp.lambda_one) {
    r.h = xb;
    r.chi = 0;
    return r;
  }
  if (t <= 0) return r;
  const auto& lw = mp.lw;
  const double lwm = lw.log_wm(t);
  const double x = std::exp(std::log(xb) - std::log(mp.zones.N) - lwm);
  r.chi = cutoff_chi(x);
  const double dx = -x * lw.dlog_wm_dt(t);
  const double dchi = cutoff_dchi(x) * dx;
  const double lam = lw.shape().lambda(t);
  double h = 0, dh = xb * lw.shape().dlambda(t) * (1 - r.chi) - xb * lam * dchi;
  if (r.chi > 0 || dchi != 0) {
    const double rh = rho(lw, t, xb);
    h += rh * r.chi;
    dh += drho_dt(lw, t, xb) * r.chi + rh * dchi;
  }
  h += xb * lam * (1 - r.chi);
  r.h = h;
  r.dh = dh;
  return r;
}

inline double h_symbol(const ModelProblem& mp, double t, double xi) {
  return h_full(mp, t, xi).h;
}

inline double model_lambda(const ModelProblem& mp, double t) {
  return mp.lambda_one ? 1.0 : mp.lw.shape().lambda(t);
}

// Principal coefficients, regularized at eps = 1/<xi> when requested.
inline std::vector<TimeCoefficient> regularized_coefficients(const ModelProblem& mp,
                                                             double xi) {
  std::vector<TimeCoefficient> out;
  const double eps = std::min(1 / japanese(xi), mp.T() / 2);
  for (auto& p : mp.principal) out.push_back(p.a.constant ? p.a : mollify(p.a, mp.kernel, eps));
  return out;
}

inline std::vector<double> char_roots(const ModelProblem& mp, double t, double xi,
                                      bool regularized,
                                      const std::vector<TimeCoefficient>* a_eps = nullptr) {
  std::vector<TimeCoefficient> local;
  if (regularized && !a_eps) {
    local = regularized_coefficients(mp, xi);
    a_eps = &local;
  }
  const double lam = model_lambda(mp, t);
  std::vector<cdouble> c(mp.m, 0.0);
  for (std::size_t k = 0; k < mp.principal.size(); ++k) {
    const auto& p = mp.principal[k];
    const double a = regularized ? (*a_eps)[k](t) : p.a(t);
    c[p.j] += std::pow(lam * xi, mp.m - p.j) * a;
  }
  const auto r = companion_roots(c);
  const double scale = std::pow(detail::coef_scale(c), 1.0 / mp.m);
  std::vector<double> out;
  for (auto& z : r) {
    if (std::fabs(z.imag()) > 1e-8 * scale)
      throw NumericalError("complex characteristic root at t = " + numerics::fmt17(t) +
                               ", xi = " + numerics::fmt17(xi),
                           std::fabs(z.imag()));
    out.push_back(z.real());
  }
  return out;
}

struct SystemMatrices {
  SmallMatrix A, B;
};

// D_t U = (A + B) U for U_k = h^{m-1-k} D_t^k u.
inline SystemMatrices first_order_system(const ModelProblem& mp, double t, double xi,
                                         const std::vector<TimeCoefficient>& a_eps) {
  const int m = mp.m;
  const HValue hv = h_full(mp, t, xi);
  const double h = hv.h, chi = hv.chi;
  const cdouble Dth(0, -hv.dh);
  const double lam = model_lambda(mp, t);
  SystemMatrices S{SmallMatrix::Zero(m, m), SmallMatrix::Zero(m, m)};
  for (int k = 0; k + 1 < m; ++k) {
    S.A(k, k + 1) = h;
    S.B(k, k) = double(m - 1 - k) * Dth / h;
  }
  for (std::size_t n = 0; n < mp.principal.size(); ++n) {
    const auto& p = mp.principal[n];
    const double scale = std::pow(lam * xi, m - p.j) / std::pow(h, m - 1 - p.j);
    const double a = p.a(t);
    const double ae = p.a.constant ? a : (chi < 1 ? a_eps[n](t) : a);
    S.A(m - 1, p.j) += scale * (chi * a + (1 - chi) * ae);
    S.B(m - 1, p.j) += scale * (1 - chi) * (a - ae);
  }
  for (auto& l : mp.lower)
    S.B(m - 1, l.j) += l.factor * l.b(t) * std::pow(xi, l.gamma) / std::pow(h, m - 1 - l.j);
  return S;
}

inline SystemMatrices first_order_system(const ModelProblem& mp, double t, double xi) {
  return first_order_system(mp, t, xi, regularized_coefficients(mp, xi));
}

struct IntegratorStats {
  long accepted = 0, rejected = 0, rhs_evals = 0;
};

struct ModeTrajectory {
  double xi_mag = 0;
  double t_xi = 0;
  std::vector<double> times, norms;
  double amplification = 1;
  double log_amplification = 0;
  IntegratorStats stats;
};

struct ModeOptions {
  double tol = 1e-10;
  bool log_time = false;  // integrate in u = log t past t_switch
  double t_switch_fraction = 1e-6;
  long max_steps = 20000000;
  bool keep_trajectory = true;
};

// Integrates one Fourier mode with an embedded Fehlberg 7(8) pair.
inline ModeTrajectory integrate_mode(const ModelProblem& mp, double xi,
                                     std::vector<cdouble> initial,
                                     const ModeOptions& opt = {}) {
  namespace ode = boost::numeric::odeint;
  const int m = mp.m;
  if (static_cast<int>(initial.size()) != m) throw DomainError("initial data needs m values");
  if (!(opt.tol > 0)) throw DomainError("tol must be positive");
  const double T = mp.T();
  const double xb = japanese(xi);
  const auto a_eps = regularized_coefficients(mp, xi);

  ModeTrajectory tr;
  tr.xi_mag = xb;
  std::vector<double> breaks{T};
  if (!mp.lambda_one && xb > mp.zones.M_cut) {
    const TXi a = t_xi(mp.lw, mp.zones, xb);
    tr.t_xi = a.t;
    breaks.push_back(a.t);
    if (xb / 2 > 1) breaks.push_back(t_xi(mp.lw, mp.zones, xb / 2).t);
  }
  const double t_switch = opt.log_time ? opt.t_switch_fraction * T : T;
  if (opt.log_time) breaks.push_back(t_switch);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  // an explicit scheme needs at least one step per radian of phase; refuse hopeless runs early
  {
    double phase = 0, prev = 0;
    const int n = 64;
    for (int i = 0; i <= n; ++i) {
      const double t = T * i / n;
      double r = 0;
      for (double v : char_roots(mp, t, xi, true, &a_eps)) r = std::max(r, std::fabs(v));
      if (i) phase += 0.5 * (prev + r) * T / n;
      prev = r;
    }
    if (phase > static_cast<double>(opt.max_steps))
      throw NumericalError("step budget exhausted at xi = " + numerics::fmt17(xi) +
                               " (phase " + numerics::fmt17(phase) + " exceeds max_steps)",
                           phase);
  }

  // state packs re/im parts; in log time the variable is u = log t
  using State = std::vector<double>;
  bool in_log = false;
  auto rhs = [&](const State& x, State& dx, double s) {
    ++tr.stats.rhs_evals;
    const double t = in_log ? std::exp(s) : s;
    const auto S = first_order_system(mp, t, xi, a_eps);
    const SmallMatrix G = cdouble(0, 1) * (S.A + S.B);
    const double jac = in_log ? t : 1.0;
    for (int i = 0; i < m; ++i) {
      cdouble acc = 0;
      for (int k = 0; k < m; ++k) acc += G(i, k) * cdouble(x[2 * k], x[2 * k + 1]);
      acc *= jac;
      dx[2 * i] = acc.real();
      dx[2 * i + 1] = acc.imag();
    }
  };
  State x(2 * m);
  for (int k = 0; k < m; ++k) {
    x[2 * k] = initial[k].real();
    x[2 * k + 1] = initial[k].imag();
  }
  auto norm = [&] {
    double s = 0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
  };
  const double n0 = norm();
  if (!(n0 > 0)) throw DomainError("initial data must be nonzero");
  double peak = n0;
  auto record = [&](double t) {
    const double n = norm();
    peak = std::max(peak, n);
    if (opt.keep_trajectory) {
      tr.times.push_back(t);
      tr.norms.push_back(n);
    }
  };
  record(0.0);

  auto stepper = ode::make_controlled(opt.tol * 1e-4, opt.tol,
                                      ode::runge_kutta_fehlberg78<State>());
  // tiny first step: d/dt h can blow up like t^{-1/2} at t = 0
  double s = 0, dt = std::min(T, 1 / xb) * 1e-20;
  for (double target : breaks) {
    if (opt.log_time && target > t_switch) {
      if (!in_log) {
        in_log = true;
        s = std::log(t_switch);
        dt = 1e-3;
      }
      target = std::log(target);
    }
    while (s < target) {
      const bool last = s + dt >= target;
      double step = last ? target - s : dt;
      const auto res = stepper.try_step(rhs, x, s, step);
      if (res == ode::success) {
        ++tr.stats.accepted;
        if (last) s = target;  // land exactly on the break
        else dt = step;        // odeint hands back the next suggestion
        record(in_log ? std::exp(s) : s);
      } else {
        ++tr.stats.rejected;
        dt = step;
      }
      const double tnow = in_log ? std::exp(s) : s;
      if (dt < 1e-15 * std::max(std::fabs(s), 1e-300) || dt < 1e-300)
        throw NumericalError("step-size underflow at t = " + numerics::fmt17(tnow) +
                                 ", xi = " + numerics::fmt17(xi) +
                                 "; try the log-time parametrization",
                             dt);
      if (tr.stats.accepted + tr.stats.rejected > opt.max_steps)
        throw NumericalError("step budget exhausted at xi = " + numerics::fmt17(xi), dt);
    }
  }
  tr.amplification = peak / n0;
  tr.log_amplification = std::log(tr.amplification);
  return tr;
}

inline std::vector<cdouble> default_initial(int m) {
  return std::vector<cdouble>(m, cdouble(1 / std::sqrt(double(m)), 0));
}

struct ThetaFit {
  double theta = 0, c = 0, d = 0, e = 0, residual = 0;
};

// min over theta of || y - (c x^theta + d log x + e) ||, linear part by least squares
inline ThetaFit fit_theta(const std::vector<double>& x, const std::vector<double>& y,
                          double lo = 0.01, double hi = 1.0) {
  const int n = static_cast<int>(x.size());
  auto solve = [&](double th) {
    Eigen::MatrixXd X(n, 3);
    Eigen::VectorXd Y(n);
    for (int i = 0; i < n; ++i) {
      X(i, 0) = std::pow(x[i], th);
      X(i, 1) = std::log(x[i]);
      X(i, 2) = 1;
      Y(i) = y[i];
    }
    const Eigen::VectorXd c = X.colPivHouseholderQr().solve(Y);
    ThetaFit f{th, c(0), c(1), c(2), (X * c - Y).norm()};
    return f;
  };
  ThetaFit best = solve(lo);
  const int steps = 1000;
  for (int i = 1; i <= steps; ++i) {
    const auto f = solve(lo + (hi - lo) * i / steps);
    if (f.residual < best.residual) best = f;
  }
  double a = std::max(lo, best.theta - (hi - lo) / steps), b = std::min(hi, best.theta + (hi - lo) / steps);
  for (int it = 0; it < 60; ++it) {
    const double c1 = a + (b - a) * 0.381966, c2 = b - (b - a) * 0.381966;
    if (solve(c1).residual < solve(c2).residual) b = c2; else a = c1;
  }
  const auto f = solve((a + b) / 2);
  return f.residual <= best.residual ? f : best;
}

struct LossRow {
  double xi = 0, t_xi = 0, log_amp = 0, M_weight = 0;
  long steps = 0;
};

struct LossReport {
  std::vector<LossRow> rows;
  double C_origin = 0;        // log_amp ~ C M through the origin
  double origin_residual = 0;  // relative rms
  double ratio_slope = 0;      // log-log slope of log_amp / M
  double ratio_max = 0;
  double plain_slope = 0;      // log-log slope of log_amp
  ThetaFit theta;
};

inline LossReport measure_loss(const ModelProblem& mp, const std::vector<double>& xi_grid,
                               const ModeOptions& opt = {}, int workers = 1,
                               std::vector<cdouble> initial = {}) {
  if (initial.empty()) initial = default_initial(mp.m);
  ModeOptions o = opt;
  o.keep_trajectory = false;
  LossReport rep;
  rep.rows = numerics::parallel_map(xi_grid.size(), workers, [&](std::size_t i) {
    const double xb = xi_grid[i];
    const double xi = std::sqrt(std::max(xb * xb - 1, 0.0));
    const auto tr = integrate_mode(mp, xi, initial, o);
    LossRow r;
    r.xi = xb;
    r.t_xi = tr.t_xi;
    r.log_amp = tr.log_amplification;
    r.M_weight = weight_parts(mp.lw, mp.zones, mp.mu, xb).total;
    r.steps = tr.stats.accepted;
    return r;
  });
  double num = 0, den = 0;
  std::vector<double> xs, la, ratio;
  for (auto& r : rep.rows) {
    num += r.log_amp * r.M_weight;
    den += r.M_weight * r.M_weight;
    xs.push_back(r.xi);
    la.push_back(r.log_amp);
    ratio.push_back(r.log_amp / r.M_weight);
    rep.ratio_max = std::max(rep.ratio_max, r.log_amp / r.M_weight);
  }
  rep.C_origin = num / den;
  double ss = 0, sy = 0;
  for (auto& r : rep.rows) {
    ss += std::pow(r.log_amp - rep.C_origin * r.M_weight, 2);
    sy += r.log_amp * r.log_amp;
  }
  rep.origin_residual = sy > 0 ? std::sqrt(ss / sy) : 0;
  const bool positive = std::all_of(la.begin(), la.end(), [](double v) { return v > 0; });
  if (positive) {
    rep.ratio_slope = numerics::loglog_slope(xs, ratio);
    rep.plain_slope = numerics::loglog_slope(xs, la);
    rep.theta = fit_theta(xs, la);
  }
  return rep;
}

// Vandermonde in psi_k/h with psi_k = d_k rho chi + tau_k (1 - chi); returns cond_2.
inline double diagonalizer_condition(const ModelProblem& mp, double t, double xi,
                                     std::vector<double> d = {}) {
  const int m = mp.m;
  if (d.empty())
    for (int k = 1; k <= m; ++k) d.push_back(k);
  const double xb = japanese(xi);
  const HValue hv = h_full(mp, t, xi);
  const double rh = mp.lambda_one || t == 0 ? 1.0 : rho(mp.lw, t, xb);
  const auto tau = char_roots(mp, t, xi, true);
  Eigen::MatrixXd V(m, m);
  for (int k = 0; k < m; ++k) {
    const double psi = d[k] * rh * hv.chi + tau[k] * (1 - hv.chi);
    for (int i = 0; i < m; ++i) V(i, k) = std::pow(psi / hv.h, i);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(V);
  const auto& sv = svd.singularValues();
  return sv(0) / sv(m - 1);
}

inline TimeCoefficient power_coefficient(double c, double p, double T = 1.0) {
  TimeCoefficient tc;
  tc.a = [c, p](double t) { return c * std::pow(std::fabs(t), p); };
  tc.T = T;
  tc.name = "power";
  return tc;
}

// lambda^{m-j} w^{m(m-j-gamma)}: the largest lower coefficient the Levi condition admits
inline TimeCoefficient levi_saturating_coefficient(const LeviWeight& lw, int j, int gamma,
                                                   double scale = 1.0) {
  TimeCoefficient tc;
  const int m = lw.m();
  tc.a = [lw, j, gamma, m, scale](double t) {
    if (t <= 0) return 0.0;
    return scale * std::exp((m - j) * lw.shape().log_lambda(std::log(t)) +
                            (m - j - gamma) * lw.log_wm(t));
  };
  tc.T = lw.shape().T();
  tc.name = "levi_saturating";
  return tc;
}

// D_t^m u = lambda^m xi^m u + lower terms, a == 1 (m = 2); the wave principal part.
inline ModelProblem wave_model(LeviWeight lw, ZonePartition z = {},
                               Modulus mu = Modulus::lipschitz()) {
  ModelProblem mp;
  mp.m = lw.m();
  mp.lw = std::move(lw);
  mp.zones = z;
  mp.mu = std::move(mu);
  if (mp.m == 2) {
    mp.principal.push_back({0, TimeCoefficient::constant_value(1.0, mp.T())});
  } else {
    // roots lambda xi {-1, 0, 1}: tau^3 = lambda^2 xi^2 tau
    mp.principal.push_back({1, TimeCoefficient::constant_value(1.0, mp.T())});
  }
  return mp;
}

// u'' - t^{2l} u_xx - t^k u_x = 0, with the weight at s = (2l-k)/(l-1-k)
inline ModelProblem ivrii_model(int l, int k, double T = 1.0) {
  if (!(k < l - 1)) throw DomainError("Ivrii model needs k < l - 1");
  const double s = double(2 * l - k) / (l - 1 - k);
  ModelProblem mp = wave_model(LeviWeight(2, s, 0, 0.0, ShapeFunction::monomial(l, T)));
  mp.lower.push_back({0, 1, cdouble(0, -1), power_coefficient(1.0, k, T)});
  validate_model(mp);
  return mp;
}

// b_{j=0,gamma=1} = -i lambda^2 w^2: the Levi bound attained with a growing phase
inline ModelProblem levi_saturating_model(double l, double s, double T = 1.0) {
  ModelProblem mp = wave_model(LeviWeight(2, s, 0, 0.0, ShapeFunction::monomial(l, T)));
  mp.lower.push_back({0, 1, cdouble(0, -1), levi_saturating_coefficient(mp.lw, 0, 1)});
  validate_model(mp);
  return mp;
}

}  // namespace hypwp
