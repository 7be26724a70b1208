#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "hypwp/errors.hpp"
#include "hypwp/moduli.hpp"
#include "hypwp/numerics.hpp"

namespace hypwp {

// Nonnegative kernel on [-1, 1] with unit mass.
class MollifierKernel {
 public:
  using Fn = std::function<double(double)>;

  // c exp(-1/(1-x^2)), normalized by quadrature
  static MollifierKernel bump() {
    auto raw = [](double x) { return std::fabs(x) < 1 ? std::exp(-1 / (1 - x * x)) : 0.0; };
    const double mass = numerics::integrate(raw, -1, 1, 1e-14);
    const double c = 1 / mass;
    MollifierKernel k;
    k.name_ = "bump";
    k.psi_ = [raw, c](double x) { return c * raw(x); };
    k.dpsi_ = [c](double x) {
      if (std::fabs(x) >= 1) return 0.0;
      const double d = 1 - x * x;
      return -c * 2 * x / (d * d) * std::exp(-1 / d);
    };
    return k;
  }

  static MollifierKernel custom(std::string name, Fn psi, Fn dpsi = {}) {
    MollifierKernel k;
    k.name_ = std::move(name);
    k.psi_ = std::move(psi);
    k.dpsi_ = std::move(dpsi);
    const double mass = numerics::integrate(k.psi_, -1, 1, 1e-13);
    if (std::fabs(mass - 1) > 1e-10)
      throw DomainError("kernel mass is " + numerics::fmt17(mass) + ", not 1");
    for (int i = 0; i <= 200; ++i)
      if (k.psi_(-1 + i / 100.0) < 0) throw DomainError("kernel must be nonnegative");
    return k;
  }

  double operator()(double x) const { return psi_(x); }
  bool has_derivative() const { return static_cast<bool>(dpsi_); }
  double derivative(double x) const { return dpsi_(x); }
  const std::string& name() const { return name_; }

 private:
  MollifierKernel() = default;
  std::string name_;
  Fn psi_, dpsi_;
};

enum class Extension { Reflect, ConstantEndpoint };

// Coefficient a(t) on [0, T] with its declared modulus; break points mark
// kinks so quadratures can split there.
struct TimeCoefficient {
  std::function<double(double)> a;
  Modulus declared_modulus = Modulus::lipschitz();
  Extension extension = Extension::Reflect;
  double T = 1.0;
  std::string name;
  bool constant = false;
  std::vector<double> breaks;
  std::function<double(double)> da;  // set on mollified coefficients

  static TimeCoefficient constant_value(double c, double T = 1.0) {
    TimeCoefficient tc;
    tc.a = [c](double) { return c; };
    tc.T = T;
    tc.constant = true;
    tc.name = "const";
    tc.da = [](double) { return 0.0; };
    return tc;
  }

  // value with the extension policy applied outside [0, T]
  double operator()(double t) const {
    if (t < 0 || t > T) {
      if (extension == Extension::ConstantEndpoint) return a(std::clamp(t, 0.0, T));
      if (t < -T || t > 2 * T) throw DomainError("extension reaches beyond one reflection");
      return a(t < 0 ? -t : 2 * T - t);
    }
    return a(t);
  }

  // kinks of the extended function
  std::vector<double> extended_breaks() const {
    std::vector<double> b{0.0, T};
    for (double c : breaks) {
      b.push_back(c);
      if (extension == Extension::Reflect) {
        b.push_back(-c);
        b.push_back(2 * T - c);
      }
    }
    return b;
  }
};

namespace detail {

// int_{-1}^{1} f(u) du split where t - eps u meets a break point
template <class F>
double split_integral(F&& f, const TimeCoefficient& a, double t, double eps,
                      double tol) {
  std::vector<double> cuts{-1.0, 1.0};
  for (double b : a.extended_breaks()) {
    const double u = (t - b) / eps;
    if (u > -1 && u < 1) cuts.push_back(u);
  }
  std::sort(cuts.begin(), cuts.end());
  double s = 0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    if (cuts[i + 1] > cuts[i]) s += numerics::integrate_endpoint(f, cuts[i], cuts[i + 1], tol);
  return s;
}

}  // namespace detail

// a_eps(t) = int a(t - eps u) psi(u) du
inline TimeCoefficient mollify(const TimeCoefficient& a, const MollifierKernel& k,
                               double eps, double tol = 1e-12) {
  if (!(eps > 0) || eps > a.T / 2) throw DomainError("eps must lie in (0, T/2]");
  if (a.constant) return a;
  TimeCoefficient out = a;
  out.name = a.name + "_eps";
  out.breaks.clear();
  out.a = [a, k, eps, tol](double t) {
    return detail::split_integral([&](double u) { return a(t - eps * u) * k(u); }, a, t,
                                  eps, tol);
  };
  if (k.has_derivative()) {
    out.da = [a, k, eps, tol](double t) {
      return detail::split_integral(
                 [&](double u) { return a(t - eps * u) * k.derivative(u); }, a, t, eps,
                 tol) /
             eps;
    };
  } else {
    auto f = out.a;
    out.da = [f, eps](double t) {
      const double h = eps * 1e-3;
      return (f(t + h) - f(t - h)) / (2 * h);
    };
  }
  return out;
}

// The regularization tied to a frequency, eps = <xi>^{-1}.
inline TimeCoefficient mollify_at_frequency(const TimeCoefficient& a,
                                            const MollifierKernel& k, double xi) {
  return mollify(a, k, 1 / xi);
}

// max over random pairs of |a(t) - a(r)| / mu(|t - r|)
inline double declared_constant(const TimeCoefficient& a, int pairs = 500,
                                unsigned seed = 1) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> U(0, a.T);
  double c = 0;
  const double s0 = a.declared_modulus.domain_max();
  for (int i = 0; i < pairs; ++i) {
    const double t = U(gen);
    const double r = std::clamp(t + (U(gen) / a.T - 0.5) * 2 * s0, 0.0, a.T);
    if (t == r) continue;
    c = std::max(c, std::fabs(a(t) - a(r)) / a.declared_modulus(std::fabs(t - r)));
  }
  return c;
}

struct MollifyReport {
  std::vector<double> eps, R1, R2;
  double slope1 = 0, slope2 = 0;
  double tolerance = 0.1;
  bool pass = false;
};

// Grid of interior points plus clusters of width ~eps around focus points,
// so that sup over t sees the eps-scale structure.
inline std::vector<double> adapted_t_grid(const std::vector<double>& base,
                                          const std::vector<double>& eps_list,
                                          const std::vector<double>& focus) {
  std::vector<double> g = base;
  for (double e : eps_list)
    for (double f : focus)
      for (int j = -8; j <= 8; ++j) g.push_back(f + e * j / 4.0);
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

inline MollifyReport verify_mollifier_bounds(const TimeCoefficient& a,
                                             const MollifierKernel& k,
                                             const std::vector<double>& eps_list,
                                             const std::vector<double>& t_grid,
                                             int workers = 1) {
  MollifyReport r;
  r.eps = eps_list;
  struct Pair {
    double r1, r2;
  };
  const auto rows = numerics::parallel_map(eps_list.size(), workers, [&](std::size_t i) {
    const double e = eps_list[i];
    const auto ae = mollify(a, k, e);
    const double mu = a.declared_modulus(e);
    double m1 = 0, m2 = 0;
    for (double t : t_grid) {
      if (t <= 0 || t >= a.T) continue;
      m1 = std::max(m1, std::fabs(ae.da(t)));
      m2 = std::max(m2, std::fabs(a(t) - ae(t)));
    }
    return Pair{m1 * e / mu, m2 / mu};
  });
  for (const auto& p : rows) {
    r.R1.push_back(p.r1);
    r.R2.push_back(p.r2);
  }
  auto slope = [&](const std::vector<double>& R) {
    if (*std::max_element(R.begin(), R.end()) == 0) return 0.0;
    std::vector<double> y(R.size());
    for (std::size_t i = 0; i < R.size(); ++i) y[i] = std::max(R[i], 1e-300);
    return numerics::loglog_slope(eps_list, y);
  };
  r.slope1 = slope(r.R1);
  r.slope2 = slope(r.R2);
  r.pass = std::fabs(r.slope1) <= r.tolerance && std::fabs(r.slope2) <= r.tolerance;
  return r;
}

}  // namespace hypwp
