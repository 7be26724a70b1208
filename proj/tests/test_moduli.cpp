#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "hypwp/moduli.hpp"

using namespace hypwp;

namespace {
std::vector<Modulus> catalog() {
  return {Modulus::lipschitz(),       Modulus::log_lip(),
          Modulus::log_log_lip(1),    Modulus::log_log_lip(2),
          Modulus::hoelder(0.5),      Modulus::hoelder(2.0 / 3),
          Modulus::log_inverse(2),    Modulus::log_inverse(0.5),
          Modulus::log_lip_squared()};
}
}  // namespace

TEST(Moduli, GeneratedWeightValues) {
  for (double x : {2.0, 10.0, 1e6}) EXPECT_DOUBLE_EQ(Modulus::lipschitz().phi(x), 1.0);
  EXPECT_NEAR(Modulus::hoelder(0.5).phi(1e4), 100.0, 1e-12);
  // mpmath: e^10 / 11^2
  EXPECT_NEAR(Modulus::log_inverse(2).phi(std::exp(10.0)), 182.03690739509683, 1e-10);
  EXPECT_NEAR(Modulus::log_lip().phi(std::exp(5.0)), 6.0, 1e-13);
}

TEST(Moduli, TableTwoRatioBounded) {
  for (const auto& mu : catalog())
    for (double x : numerics::logspace(1e2, 1e8, 61)) {
      const double r = mu.phi(x) / mu.table_phi(x);
      EXPECT_GE(r, 0.25) << static_cast<int>(mu.kind()) << " " << x;
      EXPECT_LE(r, 4.0) << static_cast<int>(mu.kind()) << " " << x;
    }
}

TEST(Moduli, GeneratedWeightNonDecreasing) {
  for (const auto& mu : catalog()) {
    double prev = 0;
    for (double x : numerics::logspace(1 / mu.domain_max(), 1e12, 200)) {
      const double v = mu.phi(x);
      EXPECT_GE(v, prev * (1 - 1e-14));
      prev = v;
    }
  }
}

TEST(Moduli, CatalogIsConcaveIncreasingSubadditive) {
  for (const auto& mu : catalog()) {
    const auto c = check_modulus(mu, 4000, 3);
    EXPECT_TRUE(c.pass()) << static_cast<int>(mu.kind()) << " conc "
                          << c.concavity_violations << " sub "
                          << c.subadditivity_violations;
  }
  EXPECT_NEAR(Modulus::log_inverse(2).domain_max(), std::exp(-2.0), 1e-16);
  // increasing only where log(1/s) >= golden ratio
  EXPECT_NEAR(Modulus::log_log_lip(1).domain_max(), std::exp(-(1 + std::sqrt(5.0)) / 2), 1e-14);
  EXPECT_NEAR(Modulus::log_log_lip(2).domain_max(), std::exp(-M_E), 1e-16);
}

TEST(Moduli, LogInverseNotConcaveOnWholeUnitInterval) {
  const auto li = Modulus::log_inverse(2);
  const auto wide = Modulus::custom("li_wide", [li](double s) { return li(s); }, 1.0);
  EXPECT_GT(check_modulus(wide, 4000, 3).concavity_violations, 0);
}

TEST(Moduli, InfimumMatchesExhaustiveScan) {
  const auto ws = WeightSequence::gevrey(2, 1, 3000);
  const auto r = log_inf_sequence(ws, 1e6);
  // mpmath exhaustive scan: p* = 999, value -1991.2542009879474
  EXPECT_EQ(r.p_star, 999);
  EXPECT_NEAR(r.log_inf, -1991.2542009879474, 1e-8);
  std::mt19937 gen(5);
  std::uniform_real_distribution<double> U(0, 7);
  for (const auto& w : {WeightSequence::gevrey(1.5, 2, 2000), WeightSequence::log_factorial(5000)}) {
    for (int i = 0; i < 30; ++i) {
      const double x = std::pow(10.0, U(gen));
      const auto fast = log_inf_sequence(w, x);
      const auto brute = log_inf_sequence(
          WeightSequence::custom("copy", [&w](int p) { return w.log_K(p); }, w.P_max()), x);
      EXPECT_EQ(fast.p_star, brute.p_star);
      EXPECT_DOUBLE_EQ(fast.log_inf, brute.log_inf);
    }
  }
}

TEST(Moduli, A7GevreyInequality) {
  const auto ws = WeightSequence::gevrey(2, 1, 4000);
  const auto eta = WeightFunction::power(0.5);
  const auto rep = check_A7(ws, eta, 0.5, numerics::logspace(1e2, 1e6, 40));
  EXPECT_TRUE(rep.pass);
  EXPECT_FALSE(rep.inconclusive);
  // Stirling: log inf ~ -2 sqrt(x) + log(2 pi sqrt(x)) up to the integer
  // rounding of p
  for (const auto& row : rep.rows) {
    const double r = std::sqrt(row.xi);
    EXPECT_NEAR(row.slack, -1.5 * r + std::log(2 * M_PI * r), 0.5) << row.xi;
  }

  const auto strong = check_A7(ws, WeightFunction::power(1.0), 1.0,
                               numerics::logspace(1e2, 1e6, 40));
  EXPECT_FALSE(strong.pass);
  EXPECT_GT(strong.max_slack, 1e5);

  const auto one = check_A7(ws, eta, 0.5, {1.0});
  EXPECT_EQ(one.rows[0].p_star, 0);
  EXPECT_EQ(one.rows[0].log_inf, 0.0);
}

TEST(Moduli, A7TruncationIsInconclusive) {
  const auto rep = check_A7(WeightSequence::gevrey(2, 1, 400), WeightFunction::power(0.5),
                            0.5, numerics::logspace(1e2, 1e6, 10));
  EXPECT_TRUE(rep.inconclusive);
  EXPECT_FALSE(rep.pass);
}
