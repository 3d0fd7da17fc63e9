#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "polyact/momentsdp.hpp"

namespace polyact {

enum class SolveStatus { Optimal, MaxIterations, NumericalFailure, Infeasible };

std::string to_string(SolveStatus s);

struct SolverOptions {
  double gap_tol = 1e-8;
  double feas_tol = 1e-8;
  int max_iters = 200;
  /// Fraction of the distance to the PSD boundary taken per step.
  double step_fraction = 0.98;
  /// Multiple of the identity used for the starting X and Y. Derived from the
  /// scaled data when unset.
  std::optional<double> initial_point_scale;
  /// Divide each block's data by its largest coefficient before solving.
  bool scale_blocks = true;
  bool record_iterations = false;
  /// When the iteration stalls or hits max_iters, the best iterate is still
  /// reported Optimal if its residuals and gap are all below this value.
  std::optional<double> accept_tol;

  void validate() const;
};

struct SolverResiduals {
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  double relative_gap = 0.0;
};

struct IterationRecord {
  int iteration;
  double primal_obj;
  double dual_obj;
  double mu;
  SolverResiduals residuals;
  double primal_step;
  double dual_step;
};

struct SdpSolution {
  /// Moment sequence with w_0 = 1.
  std::vector<double> w;
  /// Moment bound theta_mom,k.
  double primal_obj = 0.0;
  /// SOS bound theta_sos,k, read off the dual.
  double dual_obj = 0.0;
  SolveStatus status = SolveStatus::NumericalFailure;
  int iterations = 0;
  SolverResiduals residuals;
  /// Dual matrices, one per block, in the original (unscaled) data.
  std::vector<Eigen::MatrixXd> dual_blocks;
  std::vector<IterationRecord> history;
  std::string message;
};

/// Solver contract used by the hierarchy driver; alternative SDP backends
/// plug in here.
class SdpBackend {
 public:
  virtual ~SdpBackend() = default;
  virtual std::string name() const = 0;
  virtual SdpSolution solve(const MomentRelaxation& relax, const SolverOptions& opts) const = 0;
};

/// Dense infeasible-start primal-dual path-following method with the HKM
/// search direction and Mehrotra predictor-corrector steps.
class InteriorPointSolver final : public SdpBackend {
 public:
  std::string name() const override { return "dense-ipm"; }
  SdpSolution solve(const MomentRelaxation& relax, const SolverOptions& opts) const override;
};

SdpSolution solve_sdp(const MomentRelaxation& relax, const SolverOptions& opts = {});

struct BlockFeasibility {
  std::string label;
  double min_eigenvalue;
};

struct FeasibilityReport {
  std::vector<BlockFeasibility> blocks;
  double min_eigenvalue = 0.0;
  double objective = 0.0;

  bool psd(double tol) const { return min_eigenvalue >= -tol; }
};

/// Re-evaluates every block at sol.w and reports its smallest eigenvalue.
FeasibilityReport verify_solution(const MomentRelaxation& relax, const SdpSolution& sol);
FeasibilityReport verify_moments(const MomentRelaxation& relax, std::span<const double> w);

}  // namespace polyact
