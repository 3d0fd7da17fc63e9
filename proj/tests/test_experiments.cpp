#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "polyact/experiments.hpp"

using namespace polyact;

namespace {

std::string strip_time(std::string csv) {
  // Drop the Time column, which is the only nondeterministic field.
  std::string out;
  std::istringstream is(csv);
  std::string line;
  while (std::getline(is, line)) {
    const auto last = line.rfind(',');
    const auto prev = line.rfind(',', last - 1);
    out += line.substr(0, prev) + line.substr(last) + "\n";
  }
  return out;
}

}  // namespace

TEST(Families, Shapes) {
  const auto& fams = accuracy_families();
  ASSERT_EQ(fams.size(), 4u);
  EXPECT_EQ(fams[0].act_degrees, (std::vector<int>{2, 2}));
  EXPECT_EQ(fams[1].act_degrees, (std::vector<int>{2, 3}));
  EXPECT_EQ(fams[2].act_degrees, (std::vector<int>{1, 1, 1}));
  EXPECT_EQ(fams[3].act_degrees, (std::vector<int>{2, 1, 1}));
  EXPECT_EQ(residual_family().act_degrees, (std::vector<int>{3, 2}));
  const auto cfg = family_config(fams[2], 5, 20, 0.0, 1);
  EXPECT_EQ(cfg.dims, (std::vector<int>{5, 5, 5, 5, 5}));
  EXPECT_EQ(cfg.label(), "(20, 5, 5, 5, 5, 5)");
}

TEST(Config, Validation) {
  auto cfg = family_config(accuracy_families()[0], 5, 20, 0.0, 1);
  EXPECT_NO_THROW(cfg.validate());
  cfg.noise_scale = -1.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = family_config(accuracy_families()[0], 0, 20, 0.0, 1);
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(Residuals, ThreeFourFive) {
  Eigen::MatrixXd w1(1, 1), w2(2, 1);
  w1 << 1.0;
  w2 << 1.0, -1.0;
  const NetworkSpec net({1, 1, 2}, {1}, {w1, w2});
  const CoefficientVector c{0.5, 2.0};
  TrainingSet test;
  Eigen::VectorXd x(1);
  x << 0.25;
  Eigen::VectorXd eps(2);
  eps << 3.0, 4.0;
  test.samples.push_back({x, numeric_forward(net, c, x) - eps});
  const auto rep = residual_analysis(net, c, test);
  EXPECT_NEAR(rep.mse, 25.0, 1e-12);
  EXPECT_NEAR(rep.rmse, 5.0, 1e-12);
  EXPECT_EQ(rep.norms_csv(), "i,norm\n1,5\n");
  EXPECT_EQ(rep.components_csv(), "i,j,eps\n1,1,3\n1,2,4\n");
}

TEST(Residuals, ExactCoefficientsOnNoiselessTest) {
  auto cfg = family_config(residual_family(), 3, 5, 0.0, 4);
  cfg.N_test = 12;
  const auto inst = make_instance(cfg);
  ASSERT_TRUE(inst.test.has_value());
  const auto rep = residual_analysis(inst.net, inst.c_true, *inst.test);
  EXPECT_EQ(rep.residuals.size(), 12u);
  EXPECT_LE(rep.rmse, 1e-12);
  EXPECT_EQ(rep.component_trends.size(), 3u);
}

TEST(Trend, LineFitOnKnownSlope) {
  Eigen::MatrixXd w1(1, 1), w2(1, 1);
  w1 << 1.0;
  w2 << 1.0;
  const NetworkSpec net({1, 1, 1}, {1}, {w1, w2});
  const CoefficientVector c{0.0, 1.0};
  TrainingSet test;
  for (int i = 1; i <= 10; ++i) {
    Eigen::VectorXd x(1), y(1);
    x << 0.0;
    y << -0.5 * i;
    test.samples.push_back({x, y});
  }
  const auto rep = residual_analysis(net, c, test);
  EXPECT_NEAR(rep.component_trends[0].slope, 0.5, 1e-12);
  EXPECT_NEAR(rep.norm_trend.slope, 0.5, 1e-12);
  EXPECT_GT(rep.norm_trend.ratio(), 10.0);
}

TEST(Run, NoiselessQuadraticFamilyRecoversExactly) {
  const auto cfg = family_config(accuracy_families()[0], 8, 20, 0.0, 3);
  const auto rep = run_training_experiment(cfg);
  ASSERT_TRUE(rep.ok) << rep.error;
  EXPECT_TRUE(rep.certified());
  EXPECT_LE(rep.abs_err, 1e-6);
  ASSERT_TRUE(rep.hierarchy.has_value());
  EXPECT_LE(rep.hierarchy->theta, 1e-6);
  EXPECT_EQ(rep.noise_norm, 0.0);
}

TEST(Run, NoiselessLinearFamilyRecoversExactly) {
  const auto cfg = family_config(accuracy_families()[2], 5, 20, 0.0, 3);
  const auto rep = run_training_experiment(cfg);
  ASSERT_TRUE(rep.ok) << rep.error;
  EXPECT_TRUE(rep.certified());
  EXPECT_LE(rep.abs_err, 1e-6);
}

TEST(Run, NoisyQuadraticFamilyIsBounded) {
  const auto cfg = family_config(accuracy_families()[0], 8, 20, 1e-2, 3);
  const auto rep = run_training_experiment(cfg);
  ASSERT_TRUE(rep.ok) << rep.error;
  EXPECT_GT(rep.noise_norm, 0.0);
  EXPECT_LT(rep.rel_err, 1.0);
  EXPECT_NEAR(rep.rel_err, rep.abs_err / rep.noise_norm, 1e-12);
}

TEST(Run, FailuresLandInReport) {
  auto cfg = family_config(accuracy_families()[0], 4, 20, 0.0, 1);
  cfg.k_max = 0;
  const auto rep = run_training_experiment(cfg);
  EXPECT_FALSE(rep.ok);
  EXPECT_FALSE(rep.error.empty());
  EXPECT_TRUE(std::isnan(rep.abs_err));
}

TEST(Run, DeterministicJsonWithoutTiming) {
  const auto cfg = family_config(accuracy_families()[2], 4, 20, 1e-2, 9);
  const auto a = run_training_experiment(cfg);
  const auto b = run_training_experiment(cfg);
  EXPECT_EQ(a.to_json(false), b.to_json(false));
}

TEST(Sweep, OneRowMatchesSingleRun) {
  const auto cfg = family_config(accuracy_families()[2], 4, 20, 1e-2, 2);
  const auto single = run_training_experiment(cfg);
  const auto table = sweep({cfg});
  ASSERT_EQ(table.rows.size(), 1u);
  EXPECT_EQ(table.rows[0].to_json(false), single.to_json(false));
}

TEST(Sweep, FiveRowsFiveColumnsDeterministic) {
  std::vector<ExperimentConfig> cfgs;
  for (int w = 4; w <= 8; ++w) cfgs.push_back(family_config(accuracy_families()[2], w, 20, 1e-2, 5));
  const auto a = sweep(cfgs, 2);
  const auto b = sweep(cfgs, 1);
  ASSERT_EQ(a.rows.size(), 5u);
  const std::string csv = a.csv();
  std::istringstream is(csv);
  std::string line;
  int lines = 0;
  while (std::getline(is, line)) {
    ++lines;
    if (lines == 1) {
      EXPECT_EQ(line, "dims,AbsErr,RelErr,Time,noise_norm");
      continue;
    }
    // dims is quoted and contains commas, so count fields after it.
    const auto close = line.find("\",");
    ASSERT_NE(close, std::string::npos);
    EXPECT_EQ(std::count(line.begin() + static_cast<std::ptrdiff_t>(close), line.end(), ','), 4);
  }
  EXPECT_EQ(lines, 6);
  EXPECT_EQ(strip_time(a.csv()), strip_time(b.csv()));
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(a.rows[i].config.dims, cfgs[i].dims);
  EXPECT_FALSE(a.text().empty());
}
