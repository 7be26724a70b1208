#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/roots.hpp>

#include "hypwp/errors.hpp"

namespace hypwp::numerics {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::vector<double> logspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < n; ++i)
    v[static_cast<std::size_t>(i)] =
        n == 1 ? lo : std::exp(a + (b - a) * i / (n - 1));
  if (n > 1) {
    v.front() = lo;
    v.back() = hi;
  }
  return v;
}

inline std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    v[static_cast<std::size_t>(i)] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  return v;
}

// Adaptive 15-point Gauss-Kronrod on a finite interval.
template <class F>
double integrate(F&& f, double a, double b, double rel_tol = 1e-12,
                 double abs_tol = 0.0, unsigned max_depth = 18) {
  if (a == b) return 0.0;
  double err = 0, l1 = 0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      f, a, b, max_depth, rel_tol, &err, &l1);
  if (!std::isfinite(v))
    throw NumericalError("quadrature produced a non-finite value", kInf);
  if (err > std::max(rel_tol * l1, abs_tol) && err > 1e-300) {
    const double achieved = l1 > 0 ? err / l1 : err;
    if (achieved > 1e3 * rel_tol)
      throw NumericalError(
          "adaptive quadrature did not converge (achieved relative error " +
              fmt17(achieved) + ")",
          achieved);
  }
  return v;
}

// Tanh-sinh on a finite interval; tolerates integrable endpoint
// singularities such as kinks placed at the ends.
template <class F>
double integrate_endpoint(F&& f, double a, double b, double rel_tol = 1e-12,
                          double abs_tol = 0) {
  if (a == b) return 0.0;
  static thread_local boost::math::quadrature::tanh_sinh<double> rule;
  double err = 0, l1 = 0;
  std::size_t levels = 0;
  const double v = rule.integrate(f, a, b, rel_tol, &err, &l1, &levels);
  if (!std::isfinite(v))
    throw NumericalError("tanh-sinh quadrature produced a non-finite value", kInf);
  const double achieved = l1 > 0 ? err / l1 : err;
  if (achieved > std::max(1e3 * rel_tol, 1e-9) && err > abs_tol)
    throw NumericalError("tanh-sinh quadrature did not converge (achieved relative error " +
                             fmt17(achieved) + ")",
                         achieved);
  return v;
}

// Integral of f over [0, inf) by the exp-sinh rule; f must decay.
template <class F>
double integrate_half_line(F&& f, double rel_tol = 1e-12) {
  static thread_local boost::math::quadrature::exp_sinh<double> rule;
  double err = 0, l1 = 0;
  std::size_t levels = 0;
  const double v = rule.integrate(f, 0.0, kInf, rel_tol, &err, &l1, &levels);
  if (!std::isfinite(v))
    throw NumericalError("half-line quadrature produced a non-finite value", kInf);
  const double achieved = l1 > 0 ? err / l1 : err;
  if (achieved > std::max(1e3 * rel_tol, 1e-9))
    throw NumericalError(
        "half-line quadrature did not converge (achieved relative error " +
            fmt17(achieved) + ")",
        achieved);
  return v;
}

struct BisectResult {
  double root = 0;
  double width = 0;
  int iterations = 0;
};

// Root of a strictly decreasing g with g(lo) > 0 >= g(hi).
template <class G>
BisectResult bisect_decreasing(G&& g, double lo, double hi, double abs_tol) {
  int iters = 0;
  auto f = [&](double x) {
    ++iters;
    return g(x);
  };
  auto stop = [abs_tol](double a, double b) {
    return std::fabs(b - a) <= abs_tol ||
           std::fabs(b - a) <= 4 * std::numeric_limits<double>::epsilon() *
                                   std::min(std::fabs(a), std::fabs(b));
  };
  const auto r = boost::math::tools::bisect(f, lo, hi, stop);
  return {0.5 * (r.first + r.second), r.second - r.first, iters};
}

struct LineFit {
  double slope = 0;
  double intercept = 0;
  double rms_residual = 0;
};

inline LineFit fit_line(const std::vector<double>& x,
                        const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw DomainError("fit_line needs two aligned series of length >= 2");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit r;
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  double ss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - r.intercept - r.slope * x[i];
    ss += e * e;
  }
  r.rms_residual = std::sqrt(ss / n);
  return r;
}

// Slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x,
                           const std::vector<double>& y) {
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) lx[i] = std::log(x[i]);
  for (std::size_t i = 0; i < y.size(); ++i) ly[i] = std::log(y[i]);
  return fit_line(lx, ly).slope;
}

// Evaluates f(i) for i in [0, n) on up to `workers` threads. Results are
// stored by index, so the output never depends on the worker count.
template <class F>
auto parallel_map(std::size_t n, int workers, F&& f)
    -> std::vector<decltype(f(std::size_t{0}))> {
  using R = decltype(f(std::size_t{0}));
  std::vector<R> out(n);
  const std::size_t w =
      std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
  if (w <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  for (std::size_t k = 0; k < w; ++k)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          out[i] = f(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace hypwp::numerics
