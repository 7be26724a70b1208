#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "hypwp/errors.hpp"

namespace hypwp {

enum class EtaKind { Power, PowerOverLogKappa, ExampleLogCorrected, Custom };

// Candidate solution-space weight eta(<xi>) with its loss constants.
class WeightFunction {
 public:
  static WeightFunction power(double theta, double delta0 = 1, double delta1 = 1) {
    if (!(theta > 0 && theta <= 1)) throw DomainError("power weight needs theta in (0,1]");
    return WeightFunction(EtaKind::Power, theta, 0, 0, delta0, delta1);
  }
  // <xi>^theta (log <xi>)^{-kappa}
  static WeightFunction power_over_log(double theta, double kappa,
                                       double delta0 = 1, double delta1 = 1) {
    if (!(theta > 0 && theta <= 1) || !(kappa > 0))
      throw DomainError("power_over_log weight needs theta in (0,1], kappa > 0");
    return WeightFunction(EtaKind::PowerOverLogKappa, theta, kappa, 0, delta0, delta1);
  }
  // X^{1/s} log X log log X with X = <xi> / ((s-1)/s log <xi>)
  static WeightFunction example_log_corrected(double s, double delta0 = 1,
                                              double delta1 = 1) {
    if (!(s > 1)) throw DomainError("example_log_corrected weight needs s > 1");
    return WeightFunction(EtaKind::ExampleLogCorrected, 0, 0, s, delta0, delta1);
  }
  static WeightFunction custom(std::string name, std::function<double(double)> f,
                               double delta0 = 1, double delta1 = 1) {
    WeightFunction w(EtaKind::Custom, 0, 0, 0, delta0, delta1);
    w.name_ = std::move(name);
    w.f_ = std::move(f);
    return w;
  }

  EtaKind kind() const { return kind_; }
  double theta() const { return theta_; }
  double kappa() const { return kappa_; }
  double s() const { return s_; }
  double delta0() const { return delta0_; }
  double delta1() const { return delta1_; }
  const std::string& name() const { return name_; }

  double operator()(double x) const {
    switch (kind_) {
      case EtaKind::Power:
        return std::pow(x, theta_);
      case EtaKind::PowerOverLogKappa:
        return std::pow(x, theta_) * std::pow(std::log(x), -kappa_);
      case EtaKind::ExampleLogCorrected: {
        const double X = x / ((s_ - 1) / s_ * std::log(x));
        return std::pow(X, 1 / s_) * std::log(X) * std::log(std::log(X));
      }
      default:
        return f_(x);
    }
  }

 private:
  WeightFunction(EtaKind k, double theta, double kappa, double s, double d0,
                 double d1)
      : kind_(k), theta_(theta), kappa_(kappa), s_(s), delta0_(d0), delta1_(d1) {
    if (!(d0 > 0) || !(d1 > 0)) throw DomainError("delta0, delta1 must be positive");
  }

  EtaKind kind_;
  double theta_, kappa_, s_, delta0_, delta1_;
  std::string name_;
  std::function<double(double)> f_;
};

}  // namespace hypwp
