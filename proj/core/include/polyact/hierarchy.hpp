#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "polyact/momentsdp.hpp"
#include "polyact/popbuild.hpp"
#include "polyact/sdpsolve.hpp"

namespace polyact {

struct RankLevel {
  int d = 0;
  std::size_t rank_d = 0;
  std::size_t rank_lower = 0;
  std::vector<double> singular_values_d;
  std::vector<double> singular_values_lower;
};

struct FlatTruncationReport {
  bool holds = false;
  /// Witness degree; set iff holds.
  std::optional<int> d;
  /// rank M_d and rank M_{d-k0} at the witness, or at d = k when nothing matched.
  std::size_t rank = 0;
  std::size_t rank_lower = 0;
  std::vector<double> singular_values;
  std::vector<double> singular_values_lower;
  /// Every d in [k0, k] that was examined, in order.
  std::vector<RankLevel> levels;
  double tol_used = 0.0;
};

/// rank M_d[w] == rank M_{d-k0}[w] for some d in [k0, k], with numerical rank
/// = #{sigma_i > tol * sigma_max}. w must be indexed for degree 2k.
FlatTruncationReport flat_truncation(std::span<const double> w, std::size_t n, int k, int k0, double tol);

class ExtractionUnsupported : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// (w_{e_1}, ..., w_{e_n}) without any rank check.
Eigen::VectorXd degree_one_moments(std::span<const double> w, std::size_t n);

/// Rank-one extraction; throws ExtractionUnsupported unless flat truncation
/// holds with rank 1.
Eigen::VectorXd extract_minimizer(std::span<const double> w, std::size_t n, const FlatTruncationReport& flat);

/// min_j g_j(z) >= -tol and z_n <= theta_lower + tol.
bool certify(const PopInstance& pop, std::span<const double> z, double theta_lower, double tol);

/// Smallest theta that keeps the residual constraints satisfied at the c-part
/// of z, i.e. max_j |r_j(c)|. Returns z_n unchanged when pop has no residual pairs.
double epigraph_level(const PopInstance& pop, std::span<const double> z);

struct RefineResult {
  Eigen::VectorXd z;
  bool improved = false;
  int evaluations = 0;
};

/// Levenberg-Marquardt on the residuals r_j(c), started at the c-part of z.
/// The refined point is kept only if it lowers max_j |r_j| and stays feasible
/// for the remaining constraints.
RefineResult refine_candidate(const PopInstance& pop, const Eigen::VectorXd& z, double feas_tol = 1e-9);

struct HierarchyOptions {
  SolverOptions solver = default_solver();
  double rank_tol = 1e-3;
  double cert_tol = 1e-6;
  /// Polish extracted points with refine_candidate. A polished point stands in
  /// for the extracted one only if no coefficient moved by more than
  /// refine_radius * (1 + max |c_i|); the final uncertified candidate is
  /// polished without that limit.
  bool refine = true;
  double refine_radius = 1e-3;

  static SolverOptions default_solver();
  void validate() const;
};

enum class Outcome { CertifiedGlobal, CandidateUncertified, Exhausted };
std::string to_string(Outcome o);

enum class CertificateRoute { None, FlatTruncation, Gap };
std::string to_string(CertificateRoute r);

struct OrderRecord {
  int k = 0;
  double theta_mom = 0.0;
  double theta_sos = 0.0;
  SolveStatus status = SolveStatus::NumericalFailure;
  SolverResiduals residuals;
  int iterations = 0;
  std::string solver_message;
  std::size_t num_moments = 0;
  std::size_t num_blocks = 0;
  std::optional<FlatTruncationReport> flat;
  /// Extracted point of this solve, after any polishing, with theta at the epigraph level.
  std::optional<Eigen::VectorXd> candidate;
  double candidate_loss = 0.0;
  bool certified = false;
  double assemble_seconds = 0.0;
  double solve_seconds = 0.0;
  double extract_seconds = 0.0;
};

struct HierarchyResult {
  std::vector<OrderRecord> orders;
  Outcome outcome = Outcome::Exhausted;
  CertificateRoute route = CertificateRoute::None;
  /// z* = (c*, theta*) when a candidate exists.
  std::optional<Eigen::VectorXd> z;
  double theta = 0.0;
  /// Valid lower bound min(theta_mom, theta_sos) of the order the candidate came from.
  double lower_bound = 0.0;
  /// theta* - lower_bound.
  double gap = 0.0;
  bool refined = false;
  /// First order whose solve ended in NumericalFailure, if any.
  std::optional<int> failure_order;
  std::string backend;
  double total_seconds = 0.0;

  /// c* without theta.
  std::optional<Eigen::VectorXd> coefficients() const;
};

/// Runs orders k0..k_max until a minimizer is certified.
HierarchyResult solve_hierarchy(const PopInstance& pop, int k_max, const HierarchyOptions& opts = {},
                                const SdpBackend& backend = InteriorPointSolver{});

std::string to_json(const HierarchyResult& r, const std::vector<std::string>& variable_names, int indent = 2);

}  // namespace polyact
