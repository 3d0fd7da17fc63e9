#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "polyact/experiments.hpp"
#include "polyact/hierarchy.hpp"

using namespace polyact;

namespace {

PopInstance worked_pop() { return build_pop(worked_example_network(), worked_example_data()); }

PopInstance shifted_pop() {
  PopInstance pop;
  pop.n = 1;
  pop.objective = Polynomial::variable(1, 0);
  pop.constraints = {Polynomial::variable(1, 0) - Polynomial::constant(1, 5.0)};
  pop.variable_names = {"theta"};
  return pop;
}

const HierarchyResult& worked_result() {
  static const HierarchyResult r = solve_hierarchy(worked_pop(), 3);
  return r;
}

}  // namespace

TEST(FlatTruncation, DiracHoldsWithRankOne) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int t = 0; t < 10; ++t) {
    const std::size_t n = 2 + static_cast<std::size_t>(t % 3);
    const int k = 2 + t % 2;
    const TmsIndex idx(n, 2 * k);
    std::vector<double> z(n);
    for (auto& v : z) v = u(rng);
    const auto w = dirac_moments(idx, z);
    const auto rep = flat_truncation(w, n, k, 1, 1e-6);
    EXPECT_TRUE(rep.holds);
    EXPECT_EQ(rep.rank, 1u);
    EXPECT_EQ(rep.rank_lower, 1u);
    for (const auto& lvl : rep.levels) EXPECT_EQ(lvl.rank_d, 1u);
    const auto x = extract_minimizer(w, n, rep);
    for (std::size_t i = 0; i < n; ++i) EXPECT_DOUBLE_EQ(x[static_cast<Eigen::Index>(i)], z[i]);
  }
}

TEST(FlatTruncation, MixtureOfTwoPointsHasRankTwo) {
  const std::size_t n = 2;
  const TmsIndex idx(n, 4);
  const auto a = dirac_moments(idx, std::vector<double>{1.0, 0.0});
  const auto b = dirac_moments(idx, std::vector<double>{-1.0, 0.5});
  std::vector<double> w(a.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = 0.5 * (a[i] + b[i]);
  const auto rep = flat_truncation(w, n, 2, 1, 1e-6);
  EXPECT_TRUE(rep.holds);
  EXPECT_EQ(rep.rank, 2u);
  EXPECT_THROW(extract_minimizer(w, n, rep), ExtractionUnsupported);
}

TEST(Hierarchy, WorkedExampleFailsAtOneHoldsAtTwo) {
  const auto& r = worked_result();
  ASSERT_EQ(r.orders.size(), 2u);
  ASSERT_TRUE(r.orders[0].flat.has_value());
  EXPECT_FALSE(r.orders[0].flat->holds);
  ASSERT_TRUE(r.orders[1].flat.has_value());
  EXPECT_TRUE(r.orders[1].flat->holds);
  EXPECT_EQ(r.orders[1].flat->rank, 1u);
  EXPECT_EQ(r.outcome, Outcome::CertifiedGlobal);
  EXPECT_EQ(r.route, CertificateRoute::FlatTruncation);
  const auto c = r.coefficients();
  ASSERT_TRUE(c.has_value());
  const auto want = worked_example_minimizer();
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR((*c)[static_cast<Eigen::Index>(i)], want[i], 1e-5);
  EXPECT_LE(r.theta, 1e-6);
}

TEST(Hierarchy, WorkedExampleCappedAtOneIsUncertified) {
  const auto r = solve_hierarchy(worked_pop(), 1);
  ASSERT_EQ(r.orders.size(), 1u);
  EXPECT_EQ(r.outcome, Outcome::CandidateUncertified);
  EXPECT_FALSE(r.orders[0].certified);
}

TEST(Hierarchy, KMaxBelowK0Throws) { EXPECT_THROW(solve_hierarchy(worked_pop(), 0), RelaxationOrderError); }

TEST(Hierarchy, ShiftedLinearPop) {
  const auto r = solve_hierarchy(shifted_pop(), 3);
  ASSERT_EQ(r.orders.size(), 1u);
  EXPECT_EQ(r.orders[0].k, 1);
  EXPECT_EQ(r.outcome, Outcome::CertifiedGlobal);
  EXPECT_NEAR(r.theta, 5.0, 1e-6);
}

TEST(Certify, Cases) {
  const auto pop = worked_pop();
  std::vector<double> z = {1, -2, 1, -1, 0};
  EXPECT_TRUE(certify(pop, z, 0.0, 1e-6));
  auto bumped = z;
  bumped[0] += 0.1;
  EXPECT_LT(pop.min_constraint(bumped), -1e-6);
  EXPECT_FALSE(certify(pop, bumped, 0.0, 1e-6));
  auto high = z;
  high[4] = 1.0;
  EXPECT_GE(pop.min_constraint(high), 0.0);
  EXPECT_FALSE(certify(pop, high, 0.0, 1e-6));
  EXPECT_DOUBLE_EQ(epigraph_level(pop, high), 0.0);
}

TEST(Hierarchy, CertifiedResultIsSound) {
  const auto& r = worked_result();
  const auto c = r.coefficients();
  ASSERT_TRUE(c.has_value());
  const double loss = loss_eval(worked_example_network(), worked_example_data(), CoefficientVector(*c));
  const HierarchyOptions opts;
  EXPECT_LE(loss, r.theta + opts.cert_tol);
  EXPECT_LE(r.theta, r.orders.back().theta_mom + opts.cert_tol);
  EXPECT_NE(to_json(r, worked_pop().variable_names).find("\"outcome\""), std::string::npos);
}

TEST(Hierarchy, BoundsMonotoneAndBelowProbes) {
  std::mt19937_64 rng(77);
  for (int t = 0; t < 4; ++t) {
    const auto net = random_network({2, 2, 3}, {2}, rng, WeightInit::StandardNormal);
    const auto data = generate_synthetic(net, 4, 0.1, static_cast<std::uint64_t>(100 + t));
    const auto pop = build_pop(net, data);
    std::vector<double> moms;
    std::vector<double> soss;
    for (int k = pop.k0(); k <= pop.k0() + 2; ++k) {
      const auto sol = solve_sdp(assemble_relaxation(pop, k), HierarchyOptions::default_solver());
      ASSERT_EQ(sol.status, SolveStatus::Optimal) << "k=" << k << " " << sol.message;
      EXPECT_LE(sol.dual_obj, sol.primal_obj + 1e-8 * std::max(1.0, std::abs(sol.primal_obj)));
      moms.push_back(sol.primal_obj);
      soss.push_back(sol.dual_obj);
    }
    ASSERT_EQ(moms.size(), 3u);
    for (std::size_t i = 1; i < moms.size(); ++i) {
      EXPECT_LE(moms[i - 1], moms[i] + 1e-6);
      EXPECT_LE(soss[i - 1], soss[i] + 1e-6);
    }
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int p = 0; p < 50; ++p) {
      Eigen::VectorXd c(static_cast<Eigen::Index>(net.num_coefficients()));
      for (auto& v : c) v = u(rng);
      const double loss = loss_eval(net, data, CoefficientVector(c));
      for (double m : moms) EXPECT_LE(m, loss + 1e-6 * std::max(1.0, loss));
    }
  }
}

TEST(Options, Validation) {
  HierarchyOptions o;
  EXPECT_NO_THROW(o.validate());
  o.rank_tol = 0.0;
  EXPECT_THROW(o.validate(), std::invalid_argument);
  o = {};
  o.cert_tol = -1.0;
  EXPECT_THROW(o.validate(), std::invalid_argument);
}
