#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "polyact/polyring.hpp"

namespace polyact {

/// Raised when layer widths, weight shapes, or sample lengths disagree.
class ShapeError : public DimensionError {
 public:
  using DimensionError::DimensionError;
};

/// Feedforward network with given weights and learnable polynomial
/// activations p_l(t) = c_{l,d_l} t^{d_l} + ... + c_{l,1} t + c_{l,0}.
///
/// For hidden layers l < D the constant coefficient c_{l,0} is fixed to 1;
/// only the last hidden layer learns its constant term.
class NetworkSpec {
 public:
  NetworkSpec() = default;
  NetworkSpec(std::vector<int> dims, std::vector<int> act_degrees,
              std::vector<Eigen::MatrixXd> weights);

  int hidden_layers() const { return static_cast<int>(act_degrees_.size()); }
  const std::vector<int>& dims() const { return dims_; }
  const std::vector<int>& act_degrees() const { return act_degrees_; }
  /// weights()[l-1] is W_l, of shape m_l x m_{l-1}.
  const std::vector<Eigen::MatrixXd>& weights() const { return weights_; }
  int input_dim() const { return dims_.front(); }
  int output_dim() const { return dims_.back(); }

  /// |c| = d_1 + ... + d_D + 1.
  std::size_t num_coefficients() const;

  /// For hidden layer l (1-based), entry j gives the index into c of c_{l,j},
  /// or -1 when that coefficient is pinned to 1.
  std::vector<int> coefficient_slots(int layer) const;

  /// Names c<l><j> in coefficient-vector order.
  std::vector<std::string> coefficient_names() const;

 private:
  std::vector<int> dims_;
  std::vector<int> act_degrees_;
  std::vector<Eigen::MatrixXd> weights_;
};

/// Learnable coefficients laid out as
/// (c_{1,1..d_1}, ..., c_{D-1,1..d_{D-1}}, c_{D,0}, c_{D,1..d_D}).
class CoefficientVector {
 public:
  CoefficientVector() = default;
  explicit CoefficientVector(Eigen::VectorXd values) : values_(std::move(values)) {}
  CoefficientVector(std::initializer_list<double> values);

  const Eigen::VectorXd& values() const { return values_; }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
  double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }
  std::span<const double> span() const { return {values_.data(), size()}; }

 private:
  Eigen::VectorXd values_;
};

struct Sample {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
};

enum class NoisePolicy { PerSample, Shared };

struct Provenance {
  CoefficientVector c_true;
  std::vector<Eigen::VectorXd> noise;
  std::uint64_t seed = 0;
  double noise_scale = 0.0;
  NoisePolicy policy = NoisePolicy::PerSample;
};

struct TrainingSet {
  std::vector<Sample> samples;
  std::optional<Provenance> provenance;

  std::size_t size() const { return samples.size(); }
  /// Throws ShapeError naming the offending dimension.
  void validate_against(const NetworkSpec& net) const;
};

/// Per-layer activation coefficients (low to high degree) for a numeric c.
std::vector<std::vector<double>> activation_coefficients(const NetworkSpec& net,
                                                         const CoefficientVector& c);

/// f(x; c) as polynomials in the |c| coefficient variables.
std::vector<Polynomial> symbolic_forward(const NetworkSpec& net, const Eigen::VectorXd& x);

Eigen::VectorXd numeric_forward(const NetworkSpec& net, const CoefficientVector& c,
                                const Eigen::VectorXd& x);

enum class WeightInit {
  /// Uniform on [-1, 1] scaled by 1/sqrt(m_{l-1}).
  ScaledUniform,
  /// Standard normal, unscaled.
  StandardNormal,
};

NetworkSpec random_network(std::vector<int> dims, std::vector<int> act_degrees,
                           std::mt19937_64& rng, WeightInit init = WeightInit::ScaledUniform);

/// Coefficients i.i.d. uniform on [-2, 2].
CoefficientVector random_coefficients(const NetworkSpec& net, std::mt19937_64& rng);

/// Inputs uniform on [-1, 1]^{m_0}; outputs numeric_forward(c_true) plus
/// noise_scale * N(0, I). When c_true is absent it is drawn from the same
/// seeded stream.
TrainingSet generate_synthetic(const NetworkSpec& net, std::size_t num_samples,
                               double noise_scale, std::uint64_t seed,
                               std::optional<CoefficientVector> c_true = std::nullopt,
                               NoisePolicy policy = NoisePolicy::PerSample);

/// For a two-hidden-layer network with linear activations, evaluates f at
/// (c10, c11, c20, c21) and at (tau c10, tau c11, c20, c21 / tau). The
/// coefficients are passed in that order with c10 treated as free.
std::pair<Eigen::VectorXd, Eigen::VectorXd> scale_equivalence_witness(
    const NetworkSpec& net, std::span<const double> c_with_c10, double tau,
    const Eigen::VectorXd& x);

}  // namespace polyact
