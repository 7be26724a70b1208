#include <gtest/gtest.h>

#include <cmath>

#include "hypwp/spectral.hpp"

using namespace hypwp;

namespace {

ModelProblem example1_wave() {
  ModelProblem mp = wave_model(LeviWeight(2, 3.0, 0, 0.0, ShapeFunction::monomial(4)));
  validate_model(mp);
  return mp;
}

}  // namespace

TEST(Cutoff, PlateausAndSmoothJoins) {
  EXPECT_EQ(cutoff_chi(0.0), 1.0);
  EXPECT_EQ(cutoff_chi(1.0), 1.0);
  EXPECT_EQ(cutoff_chi(2.0), 0.0);
  EXPECT_EQ(cutoff_chi(7.0), 0.0);
  EXPECT_DOUBLE_EQ(cutoff_chi(1.5), 0.5);
  for (double x : {1.0 + 1e-4, 2.0 - 1e-4}) EXPECT_NEAR(cutoff_dchi(x), 0.0, 1e-9);
  // derivative matches a central difference inside the blend
  for (double x : {1.2, 1.5, 1.9}) {
    const double h = 1e-6;
    EXPECT_NEAR(cutoff_dchi(x), (cutoff_chi(x + h) - cutoff_chi(x - h)) / (2 * h), 1e-7);
    EXPECT_LE(cutoff_dchi(x), 0.0);
  }
}

TEST(CharRoots, WaveClosedForm) {
  auto mp = example1_wave();
  const auto r = char_roots(mp, 0.5, 100.0, false);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_NEAR(r[0], -6.25, 1e-12);
  EXPECT_NEAR(r[1], 6.25, 1e-12);

  mp.principal[0].a = TimeCoefficient::constant_value(2.0);
  for (double t : {0.1, 0.5, 0.9}) {
    const double ref = std::pow(t, 4) * 1e3 * std::sqrt(2.0);
    const auto q = char_roots(mp, t, 1e3, true);
    EXPECT_NEAR(q[1] / ref, 1.0, 1e-10);
    EXPECT_NEAR(q[0] / ref, -1.0, 1e-10);
  }
}

TEST(CharRoots, ThirdOrderCompanion) {
  ModelProblem mp;
  mp.m = 3;
  mp.lw = LeviWeight(3, 3.0, 0, 0.0, ShapeFunction::monomial(4));
  // tau^3 = 6 tau^2 - 11 tau + 6 (scaled): roots {1,2,3} lambda xi
  mp.principal = {{2, TimeCoefficient::constant_value(6.0)},
                  {1, TimeCoefficient::constant_value(-11.0)},
                  {0, TimeCoefficient::constant_value(6.0)}};
  validate_model(mp);
  const double t = 0.7, xi = 50, lx = std::pow(t, 4) * xi;
  const auto r = char_roots(mp, t, xi, false);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(r[k] / ((k + 1) * lx), 1.0, 1e-10);
}

TEST(CharRoots, ComplexRootsRaise) {
  auto mp = example1_wave();
  mp.principal[0].a = TimeCoefficient::constant_value(-1.0);
  EXPECT_THROW(validate_model(mp), DomainError);
  try {
    char_roots(mp, 0.5, 10.0, false);
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("xi = 10"), std::string::npos);
  }
}

TEST(HSymbol, ZonesAndLowerBound) {
  const auto mp = example1_wave();
  EXPECT_EQ(h_symbol(mp, 0.0, 1e4), 1.0);
  for (double xb : {1e2, 1e4, 1e6}) {
    const double xi = std::sqrt(xb * xb - 1);
    const double t2 = t_xi(mp.lw, mp.zones, xb / 2).t;
    const double t = std::min(1.0, t2 * 1.5);
    if (t > t2) {
      EXPECT_DOUBLE_EQ(h_symbol(mp, t, xi), xb * std::pow(t, 4));
    }
    for (double u : numerics::linspace(0.0, 1.0, 101)) EXPECT_GE(h_symbol(mp, u, xi), 1.0);
    // at the boundary rho and <xi> lambda are comparable
    const double tb = t_xi(mp.lw, mp.zones, xb).t;
    const double ratio = rho(mp.lw, tb, xb) / (xb * mp.lw.shape().lambda(tb));
    EXPECT_GT(ratio, 0.2);
    EXPECT_LT(ratio, 5.0);
  }
}

TEST(HSymbol, DerivativeMatchesDifference) {
  const auto mp = example1_wave();
  const double xi = 1e4;
  const double tb = t_xi(mp.lw, mp.zones, xi).t;
  for (double t : {0.3 * tb, 1.1 * tb, 1.3 * tb, 0.9}) {
    const double h = 1e-7 * t;
    const double fd = (h_symbol(mp, t + h, xi) - h_symbol(mp, t - h, xi)) / (2 * h);
    EXPECT_NEAR(h_full(mp, t, xi).dh / fd, 1.0, 1e-5) << t;
  }
}

TEST(FirstOrderSystem, BranchesAndEigenvalues) {
  auto mp = example1_wave();
  mp.lower.push_back({0, 1, cdouble(0, -1), power_coefficient(1.0, 1)});
  const double xi = 1e3;
  // deep hyperbolic: eigenvalues of A equal the characteristic roots
  const double t = 0.9;
  ASSERT_EQ(h_full(mp, t, xi).chi, 0.0);
  const auto S = first_order_system(mp, t, xi);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(Eigen::MatrixXcd(S.A), false);
  std::vector<double> ev{es.eigenvalues()(0).real(), es.eigenvalues()(1).real()};
  std::sort(ev.begin(), ev.end());
  const auto r = char_roots(mp, t, xi, true);
  for (int k = 0; k < 2; ++k) EXPECT_NEAR(ev[k] / r[k], 1.0, 1e-8);
  // pseudodifferential zone: B last row holds only the lower term
  const double tp = 0.5 * t_xi(mp.lw, mp.zones, japanese(xi)).t;
  const auto P = first_order_system(mp, tp, xi);
  const double h = h_symbol(mp, tp, xi);
  EXPECT_NEAR(std::abs(P.B(1, 0) - cdouble(0, -tp * xi) / h), 0.0, 1e-12 * tp * xi);
  EXPECT_EQ(P.A(0, 1), cdouble(h, 0));
}

TEST(IntegrateMode, WaveSanityConservesEnergy) {
  auto mp = example1_wave();
  mp.lambda_one = true;
  const auto tr = integrate_mode(mp, 1e3, default_initial(2));
  EXPECT_GE(tr.amplification, 1.0);
  EXPECT_LE(tr.amplification, 1 + 1e-6);
  EXPECT_GT(tr.stats.accepted, 10);
}

TEST(IntegrateMode, ZeroFrequencyPolynomialGrowth) {
  const auto mp = example1_wave();
  const auto tr = integrate_mode(mp, 0.0, default_initial(2));
  // D_t u = v0 is constant, u = u0 + i v0 t and U = (h u, v0), so
  // |U|^2 = (h^2 (1 + t^2) + 1) / 2 against |U(0)|^2 = 1
  double peak = 1;
  for (double t : numerics::linspace(0.0, 1.0, 2001)) {
    const double h = h_symbol(mp, t, 0.0);
    peak = std::max(peak, std::sqrt((h * h * (1 + t * t) + 1) / 2));
  }
  EXPECT_NEAR(tr.amplification / peak, 1.0, 1e-8);
}

TEST(IntegrateMode, IvriiConvergesUnderTolHalving) {
  const auto mp = ivrii_model(4, 1);
  EXPECT_DOUBLE_EQ(mp.lw.s(), 3.5);
  ModeOptions o;
  const auto a = integrate_mode(mp, 1e3, default_initial(2), o);
  o.tol /= 2;
  const auto b = integrate_mode(mp, 1e3, default_initial(2), o);
  EXPECT_GT(a.log_amplification, 1.0);
  EXPECT_LT(std::fabs(a.log_amplification / b.log_amplification - 1), 1e-4);
  // the break at t_xi is hit exactly
  EXPECT_NE(std::find(a.times.begin(), a.times.end(), a.t_xi), a.times.end());
}

TEST(IntegrateMode, LogTimeAgrees) {
  const auto mp = ivrii_model(4, 1);
  ModeOptions o;
  const auto a = integrate_mode(mp, 300.0, default_initial(2), o);
  o.log_time = true;
  const auto b = integrate_mode(mp, 300.0, default_initial(2), o);
  EXPECT_NEAR(a.log_amplification, b.log_amplification, 1e-6 * a.log_amplification);
}

TEST(LeviAudit, SaturatingAndIvrii) {
  const auto sat = levi_saturating_model(4, 3);
  EXPECT_NEAR(sat.audit.C, 1.0, 1e-12);
  const auto iv = ivrii_model(4, 1);
  // t / (t^8 (5/t^5)^{7/5}) = 5^{-7/5}, constant
  EXPECT_NEAR(iv.audit.C, std::pow(5.0, -1.4), 1e-12);
}

TEST(FitTheta, RecoversSyntheticExponent) {
  const auto x = numerics::logspace(1e2, 1e5, 12);
  std::vector<double> y;
  for (double v : x) y.push_back(0.7 * std::pow(v, 0.3) + 0.5 * std::log(v) - 2);
  const auto f = fit_theta(x, y);
  EXPECT_NEAR(f.theta, 0.3, 1e-6);
  EXPECT_NEAR(f.c, 0.7, 1e-5);
  EXPECT_NEAR(f.d, 0.5, 1e-4);
}

TEST(MeasureLoss, NoLowerTermsLogarithmicAtMost) {
  const auto mp = example1_wave();
  const auto xs = numerics::logspace(1e2, 1e4, 6);
  const auto rep = measure_loss(mp, xs, {}, 2);
  for (auto& r : rep.rows) EXPECT_LE(r.log_amp, 1.0 + std::log(r.xi)) << r.xi;
}

TEST(MeasureLoss, SaturatingRatioBoundedSmallGrid) {
  const auto mp = levi_saturating_model(4, 3);
  const auto rep = measure_loss(mp, numerics::logspace(1e2, 1e4, 5), {}, 2);
  EXPECT_LT(std::fabs(rep.ratio_slope), 0.05);
  EXPECT_GT(rep.C_origin, 0.5);
  EXPECT_LT(rep.C_origin, 2.0);
}

TEST(Diagonalizer, ConditionFinite) {
  const auto mp = example1_wave();
  for (double t : {0.05, 0.3, 0.9}) {
    const double c = diagonalizer_condition(mp, t, 1e4);
    EXPECT_TRUE(std::isfinite(c));
    EXPECT_GE(c, 1.0);
  }
}
