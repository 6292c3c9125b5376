#include <cmath>

#include <gtest/gtest.h>

#include "covkit/errors.hpp"
#include "covkit/pseudo_variograms.hpp"
#include "covkit/validation.hpp"
#include "oracles.hpp"

using namespace covkit;
using oracle::pt;

namespace {

const Domain D1{1, 0};
const Domain D2{2, 0};
const Domain D3{3, 0};

Eigen::MatrixXd rho2(double r) {
  Eigen::MatrixXd m(2, 2);
  m << 1.0, r, r, 1.0;
  return m;
}

ValidationConfig cfg20(std::uint64_t seed = 1) {
  ValidationConfig c;
  c.seed = seed;
  return c;
}

}  // namespace

TEST(PcvPower, Values) {
  const auto g = pcv_power(1, D2, 2.0);
  EXPECT_DOUBLE_EQ(g.evaluate(pt({0, 0}), pt({0.6, 0.8}))(0, 0), 1.0);
  EXPECT_TRUE(pcv_power(3, D2, 1.0).evaluate(pt({0.3, 0.3}), pt({0.3, 0.3})).isZero(0.0));
  EXPECT_THROW(pcv_power(1, D2, 2.5), SpecError);
  EXPECT_THROW(pcv_power(1, D2, 0.0), SpecError);
  const auto s = pcv_power(1, D1, 1.5, 2.0, 3.0);
  EXPECT_NEAR(s.evaluate(pt({0}), pt({1}))(0, 0), 3.0 * std::pow(0.5, 1.5), 1e-15);
}

TEST(PcvGAndC, NegatedOnes) {
  const auto g = pcv_g_and_c({GFunction{}, GFunction{}}, constant_kernel(2, D2, 1.0));
  EXPECT_TRUE(g.evaluate(pt({0, 1}), pt({2, 3})).isApprox(-Eigen::MatrixXd::Ones(2, 2)));
  EXPECT_TRUE(g.claims().conditionally_negative_definite);
  EXPECT_FALSE(g.claims().pseudo_variogram);
}

TEST(PcvGAndC, BoundedVariogram) {
  const auto g = pcv_g_and_c({GFunction{0.5, {}, 0.0}}, exponential_kernel(1, D2));
  EXPECT_TRUE(g.claims().pseudo_variogram);
  EXPECT_NEAR(g.evaluate(pt({0.2, 0.1}), pt({0.2, 0.1}))(0, 0), 0.0, 1e-15);
  EXPECT_NEAR(g.evaluate(pt({0, 0}), pt({0.3, 0.4}))(0, 0), 1.0 - std::exp(-0.5), 1e-15);
}

TEST(PcvGAndC, BivariateExponentialPassesPseudoCheck) {
  const auto c = exponential_kernel(2, D2, 1.0, rho2(0.5));
  const auto g = pcv_g_and_c({GFunction{0.5, {}, 0.0}, GFunction{0.5, {}, 0.0}}, c);
  EXPECT_TRUE(g.claims().pseudo_variogram);
  EXPECT_EQ(check_pseudo_variogram(g, cfg20()).verdict, Verdict::pass);
  EXPECT_EQ(check_pseudo_variogram(pcv_g_and_c_half_diagonal(c), cfg20()).verdict, Verdict::pass);
}

TEST(PcvGAndC, ShapeMismatch) {
  EXPECT_THROW(pcv_g_and_c({GFunction{}}, constant_kernel(2, D2, 1.0)), ShapeError);
}

TEST(PcvCrossVariogram, ReducesToInputForOneVariable) {
  const auto base = pcv_power(1, D2, 1.5);
  const auto g = pcv_cross_variogram(coregionalized(base, Eigen::MatrixXd::Ones(1, 1)));
  for (const auto& [x, y] : {std::pair{pt({0.1, 0.2}), pt({1.0, -0.5})}, std::pair{pt({2, 2}), pt({0, 0})}})
    EXPECT_NEAR(g.evaluate(x, y)(0, 0), base.evaluate(x, y)(0, 0), 1e-14);
  EXPECT_TRUE(g.evaluate(pt({0, 0}), pt({0, 0})).isZero(0.0));
}

TEST(PcvCrossVariogram, CoregionalizedGaussianPassesPseudoCheck) {
  const auto tg = coregionalized(pcv_gaussian(1, D2), rho2(0.6));
  EXPECT_TRUE(tg.claims().cross_variogram);
  const auto g = pcv_cross_variogram(tg);
  EXPECT_TRUE(g.claims().pseudo_variogram);
  EXPECT_EQ(check_pseudo_variogram(g, cfg20()).verdict, Verdict::pass);
}

TEST(PcvOesting, Values) {
  const auto c = exponential_kernel(2, D2, 1.0, rho2(0.4));
  const auto zero = pcv_oesting(constant_kernel(1, D2, 0.0), c);
  const double r = 0.5;
  EXPECT_NEAR(zero.evaluate(pt({0, 0}), pt({0.3, 0.4}))(0, 0), 1.0 - std::exp(-r), 1e-15);
  const auto g = pcv_oesting(pcv_power(1, D2, 1.0), c);
  EXPECT_NEAR(g.evaluate(pt({1, 1}), pt({1, 1}))(0, 1), 1.0 - 0.4, 1e-15);
  EXPECT_TRUE(g.claims().pseudo_variogram);
  EXPECT_EQ(check_pseudo_variogram(g, cfg20()).verdict, Verdict::pass);
}

TEST(PcvOesting, RejectsNonStationaryC) {
  const auto ns = pcv_g_and_c({GFunction{0.0, Eigen::Vector2d(1.0, 0.0), 0.0}}, exponential_kernel(1, D2));
  EXPECT_THROW(pcv_oesting(pcv_power(1, D2, 1.0), ns), SpecError);
}

TEST(PcvDelay, EqualDelaysReproduceGamma0) {
  const auto g0 = pcv_power(1, D1, 1.0);
  const auto g = pcv_delay(g0, {Eigen::VectorXd::Constant(1, 0.3), Eigen::VectorXd::Constant(1, 0.3)});
  const auto b = g.evaluate(pt({0.1}), pt({0.9}));
  EXPECT_TRUE(b.isApprox(Eigen::MatrixXd::Constant(2, 2, 0.8), 1e-14));
}

TEST(PcvDelay, ShiftedDelay) {
  const auto g0 = pcv_power(1, D1, 1.0);
  const auto g = pcv_delay(g0, {Eigen::VectorXd::Zero(1), Eigen::VectorXd::Constant(1, 0.5)});
  EXPECT_NEAR(g.evaluate(pt({0.2}), pt({0.2}))(0, 1), 0.5, 1e-15);
  EXPECT_NEAR(g.evaluate(pt({0.2}), pt({0.2}))(0, 0), 0.0, 0.0);
  EXPECT_NEAR(g.evaluate(pt({1.0}), pt({0.0}))(0, 1), 1.5, 1e-15);
  EXPECT_NEAR(g.evaluate(pt({0.0}), pt({1.0}))(0, 1), 0.5, 1e-15);
  EXPECT_EQ(check_pseudo_variogram(g, cfg20()).verdict, Verdict::pass);
  EXPECT_THROW(pcv_delay(g0, {Eigen::VectorXd::Zero(2)}), ShapeError);
}

TEST(PcvBernstein, TransformValues) {
  EXPECT_DOUBLE_EQ(BernsteinTransform::log1p()(0.0), 0.0);
  EXPECT_DOUBLE_EQ(BernsteinTransform::power(1.0)(3.5), 3.5);
  EXPECT_DOUBLE_EQ(BernsteinTransform::scale(2.0)(1.5), 3.0);
  EXPECT_NEAR(BernsteinTransform::rational(1.0)(1.0), 0.5, 1e-15);
  double prev = 0.0;
  for (const auto t : {BernsteinTransform::log1p(), BernsteinTransform::power(0.4),
                       BernsteinTransform::scale(0.7), BernsteinTransform::rational(1.3)}) {
    EXPECT_EQ(t(0.0), 0.0);
    prev = 0.0;
    for (double x = 0.05; x < 20.0; x *= 1.5) {
      const double v = t(x);
      EXPECT_GT(v, prev);
      prev = v;
    }
  }
}

TEST(PcvBernstein, ComposedPseudoVariogram) {
  const auto base = pcv_power(2, D2, 1.0);
  const auto id = pcv_bernstein(base, BernsteinTransform::power(1.0));
  EXPECT_TRUE(id.evaluate(pt({0, 1}), pt({1, 0})).isApprox(base.evaluate(pt({0, 1}), pt({1, 0}))));
  const auto g = pcv_bernstein(pcv_power(1, D2, 1.0), BernsteinTransform::log1p());
  EXPECT_TRUE(g.claims().pseudo_variogram);
  EXPECT_EQ(check_pseudo_variogram(g, cfg20()).verdict, Verdict::pass);
  EXPECT_TRUE(pcv_bernstein(constant_kernel(1, D2, 0.0), BernsteinTransform::log1p())
                  .evaluate(pt({3, 4}), pt({0, 0}))
                  .isZero(0.0));
}

TEST(PcvNestedSpacetime, Values) {
  const auto gs = pcv_power(1, D2, 1.0);
  const auto g = pcv_nested_spacetime(gs, constant_kernel(1, D1, 0.0));
  EXPECT_EQ(g.domain(), (Domain{2, 1}));
  EXPECT_NEAR(g.evaluate(pt({0, 0, 0}), pt({0.3, 0.4, 7.0}))(0, 0), 0.5, 1e-15);
  const auto full = pcv_nested_spacetime(gs, pcv_power(1, D1, 1.5));
  EXPECT_EQ(full.evaluate(pt({1, 2, 3}), pt({1, 2, 3}))(0, 0), 0.0);
  EXPECT_EQ(check_pseudo_variogram(full, cfg20()).verdict, Verdict::pass);
  EXPECT_THROW(pcv_nested_spacetime(pcv_power(1, Domain{1, 1}, 1.0), gs), ShapeError);
}

TEST(PcvTransport, Values) {
  const auto gs = pcv_power(1, D2, 1.0);
  const auto still = pcv_transport(gs, Eigen::Vector2d::Zero());
  EXPECT_NEAR(still.evaluate(pt({0, 0, 0}), pt({0.3, 0.4, 2.0}))(0, 0), 0.5, 1e-15);
  const Eigen::Vector2d v(0.5, -1.0);
  const auto g = pcv_transport(gs, v);
  const double u = 1.7;
  EXPECT_NEAR(g.evaluate(pt({v(0) * u, v(1) * u, u}), pt({0, 0, 0}))(0, 0), 0.0, 1e-15);
  EXPECT_EQ(check_pseudo_variogram(g, cfg20()).verdict, Verdict::pass);
  EXPECT_THROW(pcv_transport(gs, Eigen::VectorXd::Zero(3)), ShapeError);
}

TEST(PcvInvariants, FamiliesUpToThreeVariables) {
  for (const Domain dom : {D1, D2, D3}) {
    for (int m = 1; m <= 3; ++m) {
      Eigen::MatrixXd rho = Eigen::MatrixXd::Constant(m, m, 0.3);
      rho.diagonal().setOnes();
      const std::vector<KernelSpec> family{
          pcv_power(m, dom, 1.3, 0.7),
          pcv_gaussian(m, dom, 1.2, 2.0),
          pcv_g_and_c_half_diagonal(exponential_kernel(m, dom, 1.0, rho)),
          pcv_cross_variogram(coregionalized(pcv_power(1, dom, 1.0), rho)),
          pcv_oesting(pcv_power(1, dom, 1.0), gaussian_kernel(m, dom, 1.0, rho)),
          pcv_bernstein(pcv_power(m, dom, 2.0), BernsteinTransform::rational(0.8)),
      };
      for (const auto& g : family) {
        const auto rep = check_pseudo_variogram(g, cfg20(static_cast<std::uint64_t>(m)));
        EXPECT_EQ(rep.verdict, Verdict::pass) << g.op() << " m=" << m << " d=" << dom.space;
      }
    }
  }
}

TEST(PcvInvariants, PowerAboveTwoIsNotCnd) {
  const auto g = distance_power_kernel(1, D2, 2.5);
  ValidationConfig c;
  c.n_configs = 200;
  c.n_points_max = 8;
  EXPECT_EQ(check_cnd(g, c).verdict, Verdict::fail);
}
