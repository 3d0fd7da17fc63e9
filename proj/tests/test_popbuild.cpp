#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "polyact/experiments.hpp"
#include "polyact/popbuild.hpp"

using namespace polyact;

namespace {

double max_abs_coeff(const Polynomial& p) {
  double m = 0.0;
  for (const auto& [mono, c] : p.terms()) m = std::max(m, std::abs(c));
  return m;
}

Polynomial v(std::size_t i) { return Polynomial::variable(5, i); }
Polynomial one() { return Polynomial::constant(5, 1.0); }

}  // namespace

TEST(AveragedResidual, WorkedExampleComponents) {
  const auto r = averaged_residual(worked_example_network(), worked_example_data());
  ASSERT_EQ(r.num_vars, 5u);
  ASSERT_EQ(r.fhat_minus_yhat.size(), 4u);
  const Polynomial c11 = v(0), c12 = v(1), c20 = v(2), c21 = v(3);
  const Polynomial first = 3.0 * c20 + 9.0 * c21 + 29.0 * c12 * c21 - 52.0 * one();
  const Polynomial second = 5.0 * c11 * c21 - c20 + 5.0 * c12 * c21 - 4.0 * one();
  EXPECT_LE(max_abs_coeff(r.fhat_minus_yhat[0] - first), 1e-12) << r.fhat_minus_yhat[0].to_string();
  EXPECT_LE(max_abs_coeff(r.fhat_minus_yhat[1] - second), 1e-12) << r.fhat_minus_yhat[1].to_string();
  for (const auto& p : r.fhat_minus_yhat) {
    EXPECT_LE(p.degree(), 2);
    for (const auto& [mono, c] : p.terms()) EXPECT_EQ(mono[4], 0);
  }
}

TEST(AveragedResidual, VanishesAtExactFit) {
  std::mt19937_64 rng(31);
  const auto net = random_network({3, 3, 3, 2}, {2, 1}, rng);
  const auto c0 = random_coefficients(net, rng);
  TrainingSet data;
  Eigen::VectorXd x = Eigen::VectorXd::Random(3);
  data.samples.push_back({x, numeric_forward(net, c0, x)});
  const auto r = averaged_residual(net, data);
  std::vector<double> z(c0.span().begin(), c0.span().end());
  z.push_back(0.0);
  for (const auto& p : r.fhat_minus_yhat) EXPECT_NEAR(poly_eval(p, z), 0.0, 1e-10);
}

TEST(AveragedResidual, MatchesNumericAveraging) {
  std::mt19937_64 rng(32);
  for (int t = 0; t < 10; ++t) {
    const auto net = random_network({2, 3, 3, 2}, {2, 2}, rng);
    const auto data = generate_synthetic(net, 3, 0.1, static_cast<std::uint64_t>(t));
    const auto c = random_coefficients(net, rng);
    const auto r = averaged_residual(net, data);
    Eigen::VectorXd want = Eigen::VectorXd::Zero(2);
    for (const auto& s : data.samples) want += numeric_forward(net, c, s.x) - s.y;
    want /= 3.0;
    std::vector<double> z(c.span().begin(), c.span().end());
    z.push_back(0.0);
    for (std::size_t j = 0; j < 2; ++j) {
      EXPECT_NEAR(poly_eval(r.fhat_minus_yhat[j], z), want[static_cast<Eigen::Index>(j)],
                  1e-10 * std::max(1.0, std::abs(want[static_cast<Eigen::Index>(j)])));
    }
    EXPECT_NEAR(averaged_residual_value(net, data, c).cwiseAbs().maxCoeff(), want.cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(AveragedResidual, ShapeMismatch) {
  TrainingSet bad = worked_example_data();
  bad.samples[1].y = Eigen::VectorXd::Zero(3);
  EXPECT_THROW(averaged_residual(worked_example_network(), bad), ShapeError);
}

TEST(BuildPop, WorkedExampleStructure) {
  const auto pop = build_pop(worked_example_network(), worked_example_data());
  EXPECT_EQ(pop.n, 5u);
  EXPECT_EQ(pop.constraints.size(), 8u);
  EXPECT_EQ(pop.labels.size(), 8u);
  EXPECT_EQ(pop.objective, v(4));
  EXPECT_EQ(pop.constraint_degree(), 2);
  EXPECT_EQ(pop.k0(), 1);
  EXPECT_EQ(pop.variable_names, (std::vector<std::string>{"c11", "c12", "c20", "c21", "theta"}));
  const auto r = averaged_residual(worked_example_network(), worked_example_data());
  for (std::size_t j = 0; j < 4; ++j) {
    EXPECT_EQ(pop.constraints[2 * j], v(4) + r.fhat_minus_yhat[j]);
    EXPECT_EQ(pop.constraints[2 * j + 1], v(4) - r.fhat_minus_yhat[j]);
    EXPECT_EQ(pop.labels[2 * j].kind, ConstraintLabel::Kind::ResidualPlus);
    EXPECT_EQ(pop.labels[2 * j + 1].kind, ConstraintLabel::Kind::ResidualMinus);
    EXPECT_EQ(pop.labels[2 * j].index, static_cast<int>(j));
  }
}

TEST(BuildPop, MinimizerIsFeasibleWithZeroLoss) {
  const auto net = worked_example_network();
  const auto data = worked_example_data();
  const auto pop = build_pop(net, data);
  const auto c = worked_example_minimizer();
  EXPECT_NEAR(loss_eval(net, data, c), 0.0, 1e-12);
  const std::vector<double> z = {1, -2, 1, -1, 0};
  EXPECT_NEAR(pop.min_constraint(z), 0.0, 1e-12);
}

TEST(BuildPop, EpigraphBoundary) {
  const auto net = worked_example_network();
  const auto data = worked_example_data();
  const auto pop = build_pop(net, data);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int t = 0; t < 50; ++t) {
    const CoefficientVector c{u(rng), u(rng), u(rng), u(rng)};
    const double loss = loss_eval(net, data, c);
    std::vector<double> z(c.span().begin(), c.span().end());
    z.push_back(loss);
    EXPECT_NEAR(pop.min_constraint(z), 0.0, 1e-9 * std::max(1.0, loss));
    z.back() = loss * 0.9 - 1e-3;
    EXPECT_LT(pop.min_constraint(z), 0.0);
    z.back() = loss + 1.0;
    EXPECT_GT(pop.min_constraint(z), 0.0);
  }
}

TEST(BuildPop, ConstantResidualGivesLinearConstraints) {
  ResidualSystem r;
  r.num_vars = 2;
  r.fhat_minus_yhat = {Polynomial::constant(2, 3.0)};
  const auto pop = build_pop(r, {"c", "theta"});
  EXPECT_EQ(pop.constraint_degree(), 1);
  EXPECT_EQ(pop.k0(), 1);
}

TEST(BuildPop, OptionalBox) {
  PopOptions opts;
  opts.box_radius = 10.0;
  const auto pop = build_pop(worked_example_network(), worked_example_data(), opts);
  EXPECT_EQ(pop.constraints.size(), 8u + 5u);
  EXPECT_EQ(pop.labels.back().kind, ConstraintLabel::Kind::Box);
  EXPECT_NE(pop.dump().find("k0 = 1"), std::string::npos) << pop.dump();
}
