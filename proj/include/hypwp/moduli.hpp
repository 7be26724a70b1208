#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "hypwp/errors.hpp"
#include "hypwp/numerics.hpp"
#include "hypwp/weight_function.hpp"

namespace hypwp {

enum class ModulusKind { Lipschitz, LogLip, LogLogLip, Hoelder, LogInverse, Custom };

// Modulus of continuity mu on [0, s0] and its generated weight
// phi(x) = x mu(1/x).
class Modulus {
 public:
  using Fn = std::function<double(double)>;

  static Modulus lipschitz() { return Modulus(ModulusKind::Lipschitz, 0); }
  static Modulus log_lip() { return Modulus(ModulusKind::LogLip, 0); }
  static Modulus log_log_lip(int depth) {
    if (depth < 1) throw DomainError("log_log_lip depth must be >= 1");
    return Modulus(ModulusKind::LogLogLip, depth);
  }
  static Modulus hoelder(double alpha) {
    if (!(alpha > 0 && alpha < 1)) throw DomainError("Hoelder exponent must lie in (0,1)");
    return Modulus(ModulusKind::Hoelder, alpha);
  }
  static Modulus log_inverse(double alpha) {
    if (!(alpha > 0)) throw DomainError("log_inverse exponent must be positive");
    return Modulus(ModulusKind::LogInverse, alpha);
  }
  // table_phi is the closed-form generated weight if known.
  static Modulus custom(std::string name, Fn mu, double s0 = 1.0, Fn table_phi = {}) {
    Modulus m(ModulusKind::Custom, 0);
    m.name_ = std::move(name);
    m.mu_ = std::move(mu);
    m.s0_ = s0;
    m.table_phi_ = std::move(table_phi);
    return m;
  }
  // s (log(1/s) + 1)^2, generating (log <xi>)^2
  static Modulus log_lip_squared() {
    return custom(
        "log_lip_squared",
        [](double s) {
          if (s == 0) return 0.0;
          const double a = std::log(1 / s) + 1;
          return s * a * a;
        },
        std::exp(-1.0), [](double x) { return std::log(x) * std::log(x); });
  }

  ModulusKind kind() const { return kind_; }
  double parameter() const { return a_; }
  int depth() const { return static_cast<int>(a_); }
  const std::string& name() const { return name_; }

  // Right end of the interval where mu is increasing and concave (and, for
  // LogLogLip, where every iterated log is >= 1).
  double domain_max() const {
    switch (kind_) {
      case ModulusKind::LogLogLip: {
        // Lower bound on L = log(1/s): every iterated log >= 1, and
        // mu' = L G - (L + 1) G' >= 0 with G = log^[depth-1](L).
        double L = 1;
        for (int k = 1; k < depth(); ++k) L = std::exp(L);
        auto dmu = [this](double x) {
          double G = x, dG = 1;
          for (int k = 1; k < depth(); ++k) {
            dG /= G;
            G = std::log(G);
          }
          return x * G - (x + 1) * dG;
        };
        if (dmu(L) < 0) {
          double hi = L + 1;
          while (dmu(hi) < 0) hi *= 2;
          L = numerics::bisect_decreasing([&](double x) { return -dmu(x); }, L, hi,
                                          1e-15).root;
          L = std::nextafter(L, numerics::kInf);
        }
        return std::exp(-L);
      }
      case ModulusKind::LogInverse:
        return std::exp(-a_);
      case ModulusKind::Custom:
        return s0_;
      default:
        return 1.0;
    }
  }

  double operator()(double s) const {
    if (s < 0) throw DomainError("modulus argument must be >= 0");
    if (kind_ == ModulusKind::Custom) return mu_(s);
    if (s == 0) return 0.0;
    const double L = std::log(1 / s);
    switch (kind_) {
      case ModulusKind::Lipschitz:
        return s;
      case ModulusKind::LogLip:
        return s * (L + 1);
      case ModulusKind::LogLogLip:
        return s * (L + 1) * iterated_log(1 / s, depth());
      case ModulusKind::Hoelder:
        return std::pow(s, a_);
      default:
        return std::pow(L + 1, -a_);
    }
  }

  double phi(double x) const { return x * (*this)(1 / x); }

  // Table-2 asymptotic form of the generated weight (NaN if unknown).
  double table_phi(double x) const {
    const double L = std::log(x);
    switch (kind_) {
      case ModulusKind::Lipschitz:
        return 1.0;
      case ModulusKind::LogLip:
        return L;
      case ModulusKind::LogLogLip:
        return L * iterated_log(x, depth());
      case ModulusKind::Hoelder:
        return std::pow(x, 1 - a_);
      case ModulusKind::LogInverse:
        return x * std::pow(L, -a_);
      default:
        return table_phi_ ? table_phi_(x) : std::numeric_limits<double>::quiet_NaN();
    }
  }

 private:
  Modulus(ModulusKind k, double a) : kind_(k), a_(a) {}

  static double iterated_log(double x, int depth) {
    double v = x;
    for (int k = 1; k <= depth; ++k) {
      if (!(v > 0))
        throw DomainError("iterated log level " + std::to_string(k) +
                          " applied to a non-positive value");
      v = std::log(v);
    }
    return v;
  }

  ModulusKind kind_;
  double a_;
  std::string name_;
  Fn mu_, table_phi_;
  double s0_ = 1.0;
};

struct ModulusCheck {
  double s0 = 0;
  bool zero_at_origin = false;
  int monotonicity_violations = 0;
  int concavity_violations = 0;
  int subadditivity_violations = 0;
  int samples = 0;
  bool pass() const {
    return zero_at_origin && monotonicity_violations == 0 &&
           concavity_violations == 0 && subadditivity_violations == 0;
  }
};

// Sampled audit of mu(0) = 0, monotonicity, midpoint concavity and
// subadditivity on [0, s0].
inline ModulusCheck check_modulus(const Modulus& mu, int samples = 2000,
                                  unsigned seed = 1) {
  ModulusCheck c;
  c.s0 = mu.domain_max();
  c.samples = samples;
  c.zero_at_origin = mu(0) == 0;
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> U(0, 1);
  for (int i = 0; i < samples; ++i) {
    // half uniform, half log-uniform so the region near 0 is covered
    auto draw = [&] {
      return U(gen) < 0.5 ? c.s0 * U(gen) : c.s0 * std::pow(10.0, -12 * U(gen));
    };
    double a = draw(), b = draw();
    if (a > b) std::swap(a, b);
    const double ma = mu(a), mb = mu(b);
    if (mb < ma - 1e-12) ++c.monotonicity_violations;
    if (mu(0.5 * (a + b)) < 0.5 * (ma + mb) - 1e-12) ++c.concavity_violations;
    const double x = a * U(gen), y = (c.s0 - x) * U(gen);
    if (mu(x + y) > mu(x) + mu(y) + 1e-12) ++c.subadditivity_violations;
  }
  return c;
}

enum class SequenceKind { Gevrey, LogFactorial, Custom };

// Positive increasing sequence K_p, handled through log K_p.
class WeightSequence {
 public:
  static WeightSequence gevrey(double s_star, double A, int P_max = 400) {
    if (!(s_star >= 1) || !(A > 0))
      throw DomainError("Gevrey sequence needs s* >= 1, A > 0");
    return WeightSequence(SequenceKind::Gevrey, s_star, A, P_max);
  }
  // K_p = ((p+1) log(e+p))^p
  static WeightSequence log_factorial(int P_max = 400) {
    return WeightSequence(SequenceKind::LogFactorial, 0, 0, P_max);
  }
  // log_K maps p to log K_p.
  static WeightSequence custom(std::string name, std::function<double(int)> log_K,
                               int P_max = 400) {
    WeightSequence w(SequenceKind::Custom, 0, 0, P_max);
    w.name_ = std::move(name);
    w.log_K_ = std::move(log_K);
    return w;
  }

  SequenceKind kind() const { return kind_; }
  double s_star() const { return s_star_; }
  double A() const { return A_; }
  int P_max() const { return P_max_; }
  const std::string& name() const { return name_; }

  double log_K(int p) const {
    switch (kind_) {
      case SequenceKind::Gevrey:
        return s_star_ * std::lgamma(p + 1.0) + p * std::log(A_);
      case SequenceKind::LogFactorial:
        return p == 0 ? 0.0 : p * std::log((p + 1.0) * std::log(M_E + p));
      default:
        return log_K_(p);
    }
  }

  // Catalog sequences are log-convex in p, so the infimum of
  // log K_p - p log x can be located by ternary search.
  bool log_convex() const { return kind_ != SequenceKind::Custom; }

 private:
  WeightSequence(SequenceKind k, double s, double A, int P)
      : kind_(k), s_star_(s), A_(A), P_max_(P) {
    if (P < 1) throw DomainError("P_max must be >= 1");
  }

  SequenceKind kind_;
  double s_star_, A_;
  int P_max_;
  std::string name_;
  std::function<double(int)> log_K_;
};

struct InfResult {
  double log_inf = 0;
  int p_star = 0;
};

// min over p in [0, P_max] of log K_p - p log x
inline InfResult log_inf_sequence(const WeightSequence& ws, double x) {
  const double lx = std::log(x);
  auto f = [&](int p) { return ws.log_K(p) - p * lx; };
  int lo = 0, hi = ws.P_max();
  if (ws.log_convex()) {
    while (hi - lo > 2) {
      const int a = lo + (hi - lo) / 3, b = hi - (hi - lo) / 3;
      if (f(a) <= f(b)) hi = b; else lo = a;
    }
  }
  InfResult r{f(lo), lo};
  for (int p = lo + 1; p <= hi; ++p) {
    const double v = f(p);
    if (v < r.log_inf) r = {v, p};
  }
  return r;
}

struct A7Row {
  double xi = 0, log_inf = 0, slack = 0;
  int p_star = 0;
};

struct A7Report {
  std::vector<A7Row> rows;
  double max_slack = 0;
  double slack_slope = 0;  // slope of slack against log <xi>
  bool inconclusive = false;
  bool pass = false;
  double slope_tolerance = 0.05;
};

// Slack log inf_p K_p <xi>^{-p} + delta0 eta(<xi>), which must stay bounded.
inline A7Report check_A7(const WeightSequence& ws, const WeightFunction& eta,
                         double delta0, const std::vector<double>& xi_grid) {
  A7Report r;
  r.max_slack = -numerics::kInf;
  std::vector<double> lx, sl;
  for (double x : xi_grid) {
    const auto inf = log_inf_sequence(ws, x);
    A7Row row{x, inf.log_inf, inf.log_inf + delta0 * eta(x), inf.p_star};
    if (inf.p_star == ws.P_max()) r.inconclusive = true;
    r.max_slack = std::max(r.max_slack, row.slack);
    lx.push_back(std::log(x));
    sl.push_back(row.slack);
    r.rows.push_back(row);
  }
  r.slack_slope = xi_grid.size() >= 2 ? numerics::fit_line(lx, sl).slope : 0.0;
  r.pass = !r.inconclusive && r.slack_slope <= r.slope_tolerance;
  return r;
}

}  // namespace hypwp
