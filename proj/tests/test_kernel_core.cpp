#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "covkit/errors.hpp"
#include "covkit/gram.hpp"
#include "covkit/nonstationary.hpp"
#include "covkit/kernel.hpp"
#include "covkit/pseudo_variograms.hpp"
#include "covkit/stationary.hpp"
#include "covkit/validation.hpp"
#include "oracles.hpp"

using namespace covkit;
using oracle::pt;

namespace {

const Domain D1{1, 0};
const Domain D2{2, 0};

std::vector<Point> random_points(int n, int dim, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<Point> pts(static_cast<std::size_t>(n), Point(static_cast<std::size_t>(dim)));
  for (auto& p : pts)
    for (auto& v : p) v = u(rng);
  return pts;
}

}  // namespace

TEST(PointSet, RejectsRaggedAndEmpty) {
  EXPECT_THROW(PointSet(D2, {}), ShapeError);
  EXPECT_THROW(PointSet(D2, {pt({0.0, 1.0}), pt({0.0})}), ShapeError);
  EXPECT_NO_THROW(PointSet(D2, {pt({0.0, 1.0})}));
}

TEST(Evaluate, SumOfConstants) {
  const auto k = combine_sum(constant_kernel(3, D2, 1.5), constant_kernel(3, D2, 2.0));
  const Block b = k.evaluate(pt({0.3, -1.0}), pt({2.0, 5.0}));
  EXPECT_TRUE(b.isApprox(Eigen::MatrixXd::Constant(3, 3, 3.5)));
}

TEST(Evaluate, SchurWithOnesIsIdentity) {
  const auto e = exponential_kernel(2, D2, 0.7);
  const auto k = combine_schur(e, constant_kernel(2, D2, 1.0));
  for (const auto& [x, y] : {std::pair{pt({0, 0}), pt({1, 1})}, std::pair{pt({-1, 0.5}), pt({0.2, 0.1})}})
    EXPECT_EQ(k.evaluate(x, y), e.evaluate(x, y));
}

TEST(Evaluate, ExponentialLeaf) {
  const auto e = exponential_kernel(1, D1);
  EXPECT_DOUBLE_EQ(e.evaluate(pt({0.4}), pt({0.4}))(0, 0), 1.0);
  EXPECT_NEAR(e.evaluate(pt({0.0}), pt({1.0}))(0, 0), 0.36787944117144233, 1e-15);
}

TEST(Evaluate, DimensionMismatchIsShapeError) {
  const auto e = exponential_kernel(1, D2);
  EXPECT_THROW(e.evaluate(pt({0.0}), pt({1.0, 2.0})), ShapeError);
}

TEST(Evaluate, ExchangeSymmetryForSymmetricFamilies) {
  const auto k = combine_sum(gaussian_kernel(2, D2, 0.5), exponential_kernel(2, D2, 1.3));
  const auto pts = random_points(10, 2, 3);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    EXPECT_EQ(k.evaluate(pts[i], pts[i + 1]), k.evaluate(pts[i + 1], pts[i]).transpose());
}

TEST(Evaluate, Deterministic) {
  const auto k = schoenberg_exp(pcv_power(2, D2, 1.3), 0.8);
  EXPECT_EQ(k.evaluate(pt({0.1, 0.2}), pt({0.9, -0.4})), k.evaluate(pt({0.1, 0.2}), pt({0.9, -0.4})));
}

TEST(Gram, SinglePointIsK) {
  const auto k = exponential_kernel(3, D2, 1.0, Eigen::MatrixXd::Identity(3, 3) + Eigen::MatrixXd::Ones(3, 3));
  const auto g = assemble_gram(k, PointSet(D2, {pt({0.5, 0.5})}));
  EXPECT_EQ(g.matrix(), k.evaluate(pt({0.5, 0.5}), pt({0.5, 0.5})));
  const auto e = min_eigenvalue(g.data());
  EXPECT_GE(e.min_eigenvalue, -1e-10 * e.max_abs_eigenvalue);
}

TEST(Gram, ExponentialOnCollinearPoints) {
  const auto g = assemble_gram(exponential_kernel(1, D1), PointSet(D1, {pt({0}), pt({1}), pt({2})}));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(g.matrix()(i, j), std::exp(-std::abs(i - j)), 1e-15);
  EXPECT_GT(oracle::jacobi_eigenvalues(g.matrix()).front(), 0.0);
}

TEST(Gram, OnesIsRankOne) {
  const auto pts = random_points(5, 2, 1);
  const auto g = assemble_gram(constant_kernel(2, D2, 1.0), PointSet(D2, pts));
  EXPECT_NEAR(min_eigenvalue(g.data()).min_eigenvalue, 0.0, 1e-12);
}

TEST(Gram, LayoutMatchesEvaluate) {
  const auto k = schoenberg_exp(pcv_delay(pcv_power(1, D2, 1.0), {Eigen::Vector2d(0, 0), Eigen::Vector2d(0.3, 0.1)}), 1.0);
  const auto pts = random_points(6, 2, 7);
  const auto g = assemble_gram(k, PointSet(D2, pts));
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      const Block a = k.evaluate(pts[static_cast<std::size_t>(i)], pts[static_cast<std::size_t>(j)]);
      const Block b = k.evaluate(pts[static_cast<std::size_t>(j)], pts[static_cast<std::size_t>(i)]);
      for (int p = 0; p < 2; ++p)
        for (int q = 0; q < 2; ++q) EXPECT_DOUBLE_EQ(g(i, p, j, q), 0.5 * (a(p, q) + b(q, p)));
    }
}

TEST(Gram, ParallelMatchesSerialBitForBit) {
  const auto k = schoenberg_exp(pcv_oesting(pcv_power(1, D2, 1.2), exponential_kernel(3, D2, 0.8)), 0.5);
  const PointSet pts(D2, random_points(40, 2, 11));
  EXPECT_EQ(assemble_gram(k, pts).matrix(), assemble_gram_serial(k, pts).matrix());
}

TEST(Gram, EvaluationErrorNamesPair) {
  // Negative "variogram" values are outside the Askey-Beta domain.
  const auto k = askey_beta(distance_power_kernel(1, D1, 1.0, -1.0), 10.0, 1.0);
  try {
    assemble_gram(k, PointSet(D1, {pt({0.0}), pt({0.5})}));
    FAIL() << "expected EvaluationError";
  } catch (const EvaluationError& e) {
    EXPECT_NE(std::string(e.what()).find("point pair 0, 1"), std::string::npos) << e.what();
  }
}

TEST(Claims, Propagation) {
  const auto pd = exponential_kernel(2, D2);
  const auto cnd = pcv_power(2, D2, 1.0);
  EXPECT_TRUE(combine_schur(pd, pd).claims().positive_definite);
  EXPECT_TRUE(combine_sum(pd, pd).claims().positive_definite);
  EXPECT_TRUE(scale(pd, 3.0).claims().positive_definite);
  EXPECT_TRUE(combine_sum(cnd, cnd).claims().pseudo_variogram);
  EXPECT_TRUE(scale(cnd, 2.0).claims().conditionally_negative_definite);
  const auto prod = combine_schur(cnd, cnd);
  EXPECT_FALSE(prod.claims().conditionally_negative_definite);
  EXPECT_EQ(prod.kind(), KernelKind::unvalidated);
  EXPECT_EQ(cnd.kind(), KernelKind::claimed_pseudo_variogram);
  EXPECT_THROW(scale(pd, 0.0), SpecError);
  EXPECT_THROW(combine_sum(pd, exponential_kernel(3, D2)), ShapeError);
  EXPECT_THROW(combine_sum(pd, exponential_kernel(2, D1)), ShapeError);
}

TEST(Claims, ConstantShiftKeepsValidity) {
  const auto k = constant_shift(exponential_kernel(2, D2, 0.5), 0.7);
  EXPECT_TRUE(k.claims().positive_definite);
  ValidationConfig cfg;
  EXPECT_EQ(check_pd(k, cfg).verdict, Verdict::pass);
}
