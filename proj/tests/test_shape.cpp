#include <cmath>
#include <random>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <gtest/gtest.h>

#include "hypwp/shape.hpp"

using namespace hypwp;
using boost::multiprecision::cpp_bin_float_50;

TEST(Shape, MonomialValues) {
  const auto s = ShapeFunction::monomial(4);
  EXPECT_EQ(s.lambda(0), 0.0);
  EXPECT_DOUBLE_EQ(s.lambda(0.5), 0.0625);
  EXPECT_DOUBLE_EQ(s.Lambda(1), 0.2);
  EXPECT_EQ(s.Lambda(0), 0.0);
}

TEST(Shape, OutOfRangeTimeIsDomainError) {
  const auto s = ShapeFunction::monomial(4);
  EXPECT_THROW(s.lambda(-0.1), DomainError);
  EXPECT_THROW(s.Lambda(1.5), DomainError);
}

TEST(Shape, ExponentialFlatLambdaMatchesMultiprecision) {
  const auto s = ShapeFunction::exponential_flat(1);
  const cpp_bin_float_50 ref = exp(cpp_bin_float_50(-2));
  EXPECT_NEAR(s.lambda(0.5), static_cast<double>(ref), 1e-16);
  EXPECT_NEAR(s.lambda(0.5), 0.1353352832366127, 1e-16);
}

TEST(Shape, ExponentialFlatPrimitiveTwoSchemes) {
  const auto s = ShapeFunction::exponential_flat(1);
  boost::math::quadrature::tanh_sinh<double> ts;
  for (double t : {0.05, 0.1, 0.25, 0.5, 1.0}) {
    const double direct = ts.integrate(
        [](double r) { return r > 0 ? std::exp(-1 / r) : 0.0; }, 0.0, t, 1e-14);
    EXPECT_NEAR(s.Lambda(t) / direct, 1.0, 1e-10) << t;
    // incomplete-gamma representation used in log space
    EXPECT_NEAR(std::exp(s.log_Lambda(std::log(t))) / direct, 1.0, 1e-10) << t;
  }
  // mpmath: 0.5 * E_2(2) at 40 digits
  EXPECT_NEAR(s.Lambda(0.5), 0.018767130910245226, 2e-16);
}

TEST(Shape, LogLambdaStaysFiniteBelowUnderflow) {
  const auto s = ShapeFunction::exponential_flat(1);
  // z = t^{-1} = 1e4: leading behaviour -z - 2 log z
  const double lL = s.log_Lambda(std::log(1e-4));
  EXPECT_NEAR(lL, -1e4 - 2 * std::log(1e4) + std::log1p(-2e-4 + 6e-8), 1e-9);
}

TEST(Shape, MonotoneAndDerivativeConsistent) {
  for (const auto& s : {ShapeFunction::monomial(4), ShapeFunction::monomial(1.5),
                        ShapeFunction::exponential_flat(1)}) {
    double prev = -1;
    for (int i = 1; i <= 50; ++i) {
      const double t = i / 51.0;
      const double L = s.Lambda(t);
      EXPECT_GT(L, prev);
      prev = L;
      if (t < 0.1) continue;  // keep Lambda well above roundoff
      const double h = t * 1e-5;
      const double tp = std::min(t + h, 1.0);
      const double d = (s.Lambda(tp) - s.Lambda(t - h)) / (tp - t + h);
      EXPECT_NEAR(d / s.lambda(t), 1.0, 1e-6) << t;
    }
  }
}

TEST(Shape, MonomialIdentity) {
  std::vector<double> grid;
  for (int i = 0; i < 100; ++i) grid.push_back(std::pow(10.0, -3 + 3.0 * i / 99));
  const auto rep = check_shape_conditions(ShapeFunction::monomial(4), 3, 2, grid);
  for (double q : rep.ratios) EXPECT_NEAR(q, 0.8, 1e-12);
  EXPECT_NEAR(rep.c0, 0.8, 1e-12);
  EXPECT_NEAR(rep.c, 0.8, 1e-12);
  EXPECT_DOUBLE_EQ(rep.threshold, 0.75);
  EXPECT_TRUE(rep.pass);
  EXPECT_NEAR(rep.k2_ratio, 0.75, 1e-12);  // (l-1)/l

  const auto b = check_shape_conditions(ShapeFunction::monomial(1), 3, 2, grid);
  EXPECT_NEAR(b.c0, 0.5, 1e-12);
  EXPECT_FALSE(b.pass);
}

TEST(Shape, ExponentialFlatConstants) {
  const auto s = ShapeFunction::exponential_flat(1);
  // the ratio tends to 1 as t -> 0 and equals about 0.40 at t = 1
  auto wide = check_shape_conditions(s, 3, 2, numerics::logspace(0.05, 1, 40));
  EXPECT_NEAR(wide.c0, 0.40365, 1e-4);
  EXPECT_FALSE(wide.pass);  // threshold 0.75
  auto near0 = check_shape_conditions(s, 3, 2, numerics::logspace(0.005, 0.1, 40));
  EXPECT_TRUE(near0.pass);
  EXPECT_TRUE(std::isfinite(near0.c));
  EXPECT_LT(near0.c, 1.0);
}

TEST(Shape, CustomShapeUsesQuadratureAndDifferences) {
  const auto c = ShapeFunction::custom("t^3", [](double t) { return t * t * t; }, 1.0);
  const auto m = ShapeFunction::monomial(3);
  std::mt19937 gen(7);
  std::uniform_real_distribution<double> U(0.01, 1.0);
  for (int i = 0; i < 20; ++i) {
    const double t = U(gen);
    EXPECT_NEAR(c.Lambda(t) / m.Lambda(t), 1.0, 1e-11);
    EXPECT_NEAR(c.dlambda(t) / m.dlambda(t), 1.0, 1e-8);
  }
  auto bad = ShapeFunction::custom("zero", [](double) { return 0.0; }, 1.0);
  EXPECT_THROW(check_shape_conditions(bad, 3, 2, {0.5}), DomainError);
}
