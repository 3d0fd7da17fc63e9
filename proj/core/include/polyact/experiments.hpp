#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "polyact/hierarchy.hpp"
#include "polyact/netmodel.hpp"
#include "polyact/popbuild.hpp"

namespace polyact {

struct Family {
  std::string name;
  std::vector<int> act_degrees;
};

/// The four accuracy families: 2-layer quadratic, 2-layer quadratic+cubic,
/// 3-layer linear, 3-layer quadratic+linear+linear.
const std::vector<Family>& accuracy_families();

/// 2-layer cubic then quadratic, used for residual analysis.
Family residual_family();

/// Two hidden layers of width 4, p_1 quadratic and p_2 linear, two samples.
/// Its global minimizer is c = (1, -2, 1, -1) with zero loss.
NetworkSpec worked_example_network();
TrainingSet worked_example_data();
CoefficientVector worked_example_minimizer();

struct ExperimentConfig {
  std::vector<int> dims;
  std::vector<int> act_degrees;
  std::size_t N = 20;
  /// Held-out test set size; 0 skips residual analysis.
  std::size_t N_test = 0;
  double noise_scale = 1e-2;
  std::uint64_t seed = 0;
  /// Defaults to k0 + 1.
  std::optional<int> k_max;
  HierarchyOptions hierarchy;
  WeightInit weight_init = WeightInit::StandardNormal;
  NoisePolicy noise_policy = NoisePolicy::PerSample;
  std::optional<double> box_radius;

  void validate() const;
  /// "(N, m0, m1, ...)"
  std::string label() const;
};

/// A family at uniform width: dims = (w, w, ..., w) with one entry per layer.
ExperimentConfig family_config(const Family& f, int width, std::size_t N, double noise, std::uint64_t seed);

struct SyntheticInstance {
  NetworkSpec net;
  CoefficientVector c_true;
  TrainingSet train;
  /// Present when cfg.N_test > 0; same input distribution as train, no noise.
  std::optional<TrainingSet> test;
};

/// Network, c_true, training and test data for cfg, all from cfg.seed.
SyntheticInstance make_instance(const ExperimentConfig& cfg);

struct LinearTrend {
  double slope = 0.0;
  double stderr_ = 0.0;
  /// |slope| / stderr; 0 when the fit is exact.
  double ratio() const;
};

struct ResidualReport {
  /// eps_i = y'_i - y_i with y'_i predicted at eps = 0.
  std::vector<Eigen::VectorXd> residuals;
  double mse = 0.0;
  double rmse = 0.0;
  /// Least-squares line through ||eps_i|| against i.
  LinearTrend norm_trend;
  /// Same fit per output component.
  std::vector<LinearTrend> component_trends;

  /// Columns i, j, eps_ij (1-based indices).
  std::string components_csv() const;
  /// Columns i, norm.
  std::string norms_csv() const;
};

ResidualReport residual_analysis(const NetworkSpec& net, const CoefficientVector& c_pred, const TrainingSet& test);

struct PhaseTimes {
  double generate = 0.0;
  double symbolic = 0.0;
  double assemble = 0.0;
  double solve = 0.0;
  double extract = 0.0;
  double total = 0.0;
};

struct ExperimentReport {
  ExperimentConfig config;
  /// False when the pipeline threw; error holds the message.
  bool ok = false;
  std::string error;
  Eigen::VectorXd c_true;
  std::optional<Eigen::VectorXd> c_pred;
  double abs_err = 0.0;
  double rel_err = 0.0;
  /// || (1/N) sum_i eps_i ||_2, the RelErr denominator.
  double noise_norm = 0.0;
  /// (1/N) sum_i ||eps_i||_2
  double mean_sample_noise_norm = 0.0;
  std::optional<HierarchyResult> hierarchy;
  std::optional<ResidualReport> test;
  PhaseTimes times;

  bool certified() const { return hierarchy && hierarchy->outcome == Outcome::CertifiedGlobal; }
  std::string to_json(bool include_timing = true, int indent = 2) const;
};

/// Generates network, coefficients and data from cfg.seed, builds the POP,
/// runs the hierarchy and scores the result. Never throws on pipeline
/// failures; they land in ok/error.
ExperimentReport run_training_experiment(const ExperimentConfig& cfg);

struct SweepTable {
  std::vector<ExperimentReport> rows;

  std::string text() const;
  /// Columns dims, AbsErr, RelErr, Time, noise_norm.
  std::string csv() const;
};

/// Runs every config, up to `workers` at a time. Rows keep input order.
SweepTable sweep(const std::vector<ExperimentConfig>& cfgs, int workers = 1);

}  // namespace polyact
