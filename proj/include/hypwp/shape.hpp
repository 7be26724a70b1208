#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "hypwp/errors.hpp"
#include "hypwp/numerics.hpp"

namespace hypwp {

enum class ShapeKind { Monomial, ExponentialFlat, Custom };

// Degeneracy profile lambda on [0, T] together with its primitive Lambda.
class ShapeFunction {
 public:
  using Fn = std::function<double(double)>;

  static ShapeFunction monomial(double l, double T = 1.0) {
    if (!(l > 0)) throw DomainError("monomial shape needs l > 0");
    return ShapeFunction(ShapeKind::Monomial, l, T);
  }

  static ShapeFunction exponential_flat(double r, double T = 1.0) {
    if (!(r > 0)) throw DomainError("exponential_flat shape needs r > 0");
    return ShapeFunction(ShapeKind::ExponentialFlat, r, T);
  }

  // Lambda and lambda' are optional; quadrature and central differences
  // stand in for missing closed forms.
  static ShapeFunction custom(std::string name, Fn lambda, double T,
                              Fn primitive = {}, Fn derivative = {}) {
    ShapeFunction s(ShapeKind::Custom, 0.0, T);
    s.name_ = std::move(name);
    s.lambda_ = std::move(lambda);
    s.primitive_ = std::move(primitive);
    s.derivative_ = std::move(derivative);
    return s;
  }

  ShapeKind kind() const { return kind_; }
  double T() const { return T_; }
  // l for Monomial, r for ExponentialFlat.
  double parameter() const { return p_; }
  const std::string& name() const { return name_; }
  bool has_closed_derivative() const {
    return kind_ != ShapeKind::Custom || static_cast<bool>(derivative_);
  }

  double lambda(double t) const {
    check_t(t);
    switch (kind_) {
      case ShapeKind::Monomial:
        return std::pow(t, p_);
      case ShapeKind::ExponentialFlat:
        return t == 0 ? 0.0 : std::exp(-std::pow(t, -p_));
      default:
        return lambda_(t);
    }
  }

  double Lambda(double t, double rel_tol = 1e-12) const {
    check_t(t);
    if (t == 0) return 0.0;
    if (kind_ == ShapeKind::Monomial) return std::pow(t, p_ + 1) / (p_ + 1);
    if (kind_ == ShapeKind::Custom && primitive_) return primitive_(t);
    // u = log r, then v = log t - u on [0, inf).
    auto f = [&](double v) {
      const double r = t * std::exp(-v);
      return r > 0 ? raw_lambda(r) * r : 0.0;
    };
    return numerics::integrate_half_line(f, rel_tol);
  }

  double dlambda(double t) const {
    check_t(t);
    switch (kind_) {
      case ShapeKind::Monomial:
        return p_ * std::pow(t, p_ - 1);
      case ShapeKind::ExponentialFlat:
        return t == 0 ? 0.0
                      : p_ * std::pow(t, -p_ - 1) * std::exp(-std::pow(t, -p_));
      default:
        if (derivative_) return derivative_(t);
        return central_difference(lambda_, t, 1e-6);
    }
  }

  double d2lambda(double t) const {
    check_t(t);
    switch (kind_) {
      case ShapeKind::Monomial:
        return p_ * (p_ - 1) * std::pow(t, p_ - 2);
      case ShapeKind::ExponentialFlat: {
        if (t == 0) return 0.0;
        const double g = p_ * std::pow(t, -p_ - 1);
        return (g * g - p_ * (p_ + 1) * std::pow(t, -p_ - 2)) *
               std::exp(-std::pow(t, -p_));
      }
      default:
        if (derivative_) return central_difference(derivative_, t, 1e-6);
        const double h = t * 1e-4;
        const double hi = std::min(t + h, T_);
        const double lo = t - (hi - t);
        return (lambda_(hi) - 2 * lambda_(t) + lambda_(lo)) / ((hi - t) * (hi - t));
    }
  }

  // lambda'/lambda, exact where a closed form exists.
  double dlog_lambda(double t) const {
    switch (kind_) {
      case ShapeKind::Monomial:
        return p_ / t;
      case ShapeKind::ExponentialFlat:
        return p_ * std::pow(t, -p_ - 1);
      default:
        return dlambda(t) / lambda(t);
    }
  }

  // log lambda and log Lambda as functions of log t. These stay finite far
  // below the underflow threshold of lambda itself.
  double log_lambda(double log_t) const {
    switch (kind_) {
      case ShapeKind::Monomial:
        return p_ * log_t;
      case ShapeKind::ExponentialFlat:
        return -std::exp(-p_ * log_t);
      default:
        return std::log(lambda_(std::exp(log_t)));
    }
  }

  double log_Lambda(double log_t) const {
    switch (kind_) {
      case ShapeKind::Monomial:
        return (p_ + 1) * log_t - std::log(p_ + 1);
      case ShapeKind::ExponentialFlat: {
        // With z = t^{-r}: Lambda = (1/r) e^{-z} z^{-1-1/r} J(z),
        // J(z) = int_0^inf e^{-v} (1 + v/z)^{-1-1/r} dv.
        const double z = std::exp(-p_ * log_t);
        const double q = 1 + 1 / p_;
        const double J = numerics::integrate_half_line(
            [&](double v) { return std::exp(-v - q * std::log1p(v / z)); },
            1e-13);
        return -z - std::log(p_) - q * std::log(z) + std::log(J);
      }
      default:
        return std::log(Lambda(std::exp(log_t)));
    }
  }

  double lambda_over_Lambda(double t) const {
    const double lt = std::log(t);
    return std::exp(log_lambda(lt) - log_Lambda(lt));
  }

 private:
  ShapeFunction(ShapeKind k, double p, double T) : kind_(k), p_(p), T_(T) {
    if (!(T > 0) || !std::isfinite(T)) throw DomainError("shape needs T > 0");
  }

  void check_t(double t) const {
    if (!(t >= 0) || t > T_ * (1 + 1e-12))
      throw DomainError("time " + numerics::fmt17(t) + " outside [0, " +
                        numerics::fmt17(T_) + "]");
  }

  double raw_lambda(double t) const {
    switch (kind_) {
      case ShapeKind::Monomial:
        return std::pow(t, p_);
      case ShapeKind::ExponentialFlat:
        return std::exp(-std::pow(t, -p_));
      default:
        return lambda_(t);
    }
  }

  // Central difference with relative step; one-sided at the right end.
  double central_difference(const Fn& f, double t, double rel) const {
    const double h = t * rel;
    if (t + h > T_) return (f(t) - f(t - h)) / h;
    return (f(t + h) - f(t - h)) / (2 * h);
  }

  ShapeKind kind_;
  double p_;
  double T_;
  std::string name_;
  Fn lambda_, primitive_, derivative_;
};

struct ShapeReport {
  std::vector<double> grid;
  std::vector<double> ratios;  // (lambda'/lambda)/(lambda/Lambda)
  double c0 = 0;
  double c = 0;
  double threshold = 0;  // s(m-1)/((s-1)m)
  bool pass = false;
  double k2_ratio = 0;   // max |lambda''| / ((lambda'/lambda)|lambda'|)
  int derivative_orders_checked = 2;
};

inline ShapeReport check_shape_conditions(const ShapeFunction& shape, double s,
                                          int m,
                                          const std::vector<double>& grid) {
  if (m < 2) throw DomainError("order m must be >= 2");
  if (!(s > 1)) throw DomainError("Gevrey parameter s must exceed 1");
  ShapeReport r;
  r.grid = grid;
  r.threshold = s * (m - 1) / ((s - 1) * m);
  r.c0 = numerics::kInf;
  r.c = 0;
  for (double t : grid) {
    if (!(t > 0) || t > shape.T())
      throw DomainError("shape grid must lie in (0, T]");
    const double lam = shape.lambda(t);
    if (lam == 0 && shape.log_lambda(std::log(t)) == -numerics::kInf)
      throw DomainError("lambda vanishes at grid point t = " +
                        numerics::fmt17(t));
    const double q = shape.dlog_lambda(t) / shape.lambda_over_Lambda(t);
    r.ratios.push_back(q);
    r.c0 = std::min(r.c0, q);
    r.c = std::max(r.c, q);
    const double d1 = shape.dlambda(t);
    if (d1 != 0) {
      const double k2 = std::fabs(shape.d2lambda(t)) /
                        (shape.dlog_lambda(t) * std::fabs(d1));
      if (std::isfinite(k2)) r.k2_ratio = std::max(r.k2_ratio, k2);
    }
  }
  r.pass = r.c0 > r.threshold && std::isfinite(r.c);
  return r;
}

}  // namespace hypwp
