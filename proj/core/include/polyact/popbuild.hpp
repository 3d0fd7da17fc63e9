#pragma once

#include <optional>
#include <string>
#include <vector>

#include "polyact/netmodel.hpp"
#include "polyact/polyring.hpp"

namespace polyact {

/// f_hat(z) - y_hat: the sample-averaged network output minus the averaged
/// targets, one polynomial per output component. Polynomials live in the
/// full z = (c, theta) space and never involve theta.
struct ResidualSystem {
  std::size_t num_vars = 0;
  std::vector<Polynomial> fhat_minus_yhat;
};

struct ConstraintLabel {
  enum class Kind { ResidualPlus, ResidualMinus, Box };
  Kind kind;
  /// Output component j (0-based) for residual constraints, variable index for box constraints.
  int index;

  std::string to_string() const;
};

/// min z_n  s.t.  g_j(z) >= 0, with z = (c, theta) and the +/- residual pairs
/// g_{2j-1} = z_n + r_j, g_{2j} = z_n - r_j.
struct PopInstance {
  std::size_t n = 0;
  Polynomial objective;
  std::vector<Polynomial> constraints;
  std::vector<ConstraintLabel> labels;
  std::vector<std::string> variable_names;

  int constraint_degree() const;
  /// ceil(deg(g) / 2)
  int k0() const;
  /// min_j g_j(z)
  double min_constraint(std::span<const double> z) const;
  /// Objective, each g_j and k0, one per line.
  std::string dump() const;
};

struct PopOptions {
  /// Adds R^2 - z_i^2 >= 0 for every variable. Not part of the plain
  /// epigraph problem; off by default.
  std::optional<double> box_radius;
};

ResidualSystem averaged_residual(const NetworkSpec& net, const TrainingSet& data);

PopInstance build_pop(const NetworkSpec& net, const TrainingSet& data, const PopOptions& opts = {});
PopInstance build_pop(const ResidualSystem& residual, std::vector<std::string> variable_names,
                      const PopOptions& opts = {});

/// || (1/N) sum_i (f(x_i; c) - y_i) ||_inf
double loss_eval(const NetworkSpec& net, const TrainingSet& data, const CoefficientVector& c);

/// Averaged residual vector (1/N) sum_i (f(x_i; c) - y_i).
Eigen::VectorXd averaged_residual_value(const NetworkSpec& net, const TrainingSet& data,
                                        const CoefficientVector& c);

}  // namespace polyact
