#pragma once

#include <Eigen/Dense>

#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "polyact/polyring.hpp"
#include "polyact/popbuild.hpp"

namespace polyact {

/// Position lookup for a truncated moment sequence w = (w_alpha), |alpha| <= degree.
/// Index 0 is the constant moment w_0; indices 1..n are w_{e_1}..w_{e_n}.
class TmsIndex {
 public:
  TmsIndex(std::size_t n, int degree);

  std::size_t num_vars() const { return basis_.num_vars(); }
  int degree() const { return basis_.max_degree(); }
  std::size_t size() const { return basis_.size(); }
  const MonomialBasis& basis() const { return basis_; }
  const Monomial& power(std::size_t i) const { return basis_[i]; }

  /// Throws std::out_of_range if alpha exceeds the truncation degree.
  std::size_t index_of(const Monomial& alpha) const;

 private:
  MonomialBasis basis_;
  std::unordered_map<Monomial, std::size_t, MonomialHash> position_;
};

struct LinearTerm {
  std::size_t index;
  double coeff;
  bool operator==(const LinearTerm&) const = default;
};

/// Symmetric matrix whose entries are linear functionals of w. Only the upper
/// triangle is stored.
class LinearMatrixBlock {
 public:
  LinearMatrixBlock() = default;
  LinearMatrixBlock(std::string label, std::size_t size);

  const std::string& label() const { return label_; }
  void set_label(std::string label) { label_ = std::move(label); }
  std::size_t size() const { return size_; }

  /// Entry (a, b); order of a and b does not matter.
  const std::vector<LinearTerm>& at(std::size_t a, std::size_t b) const;
  void add(std::size_t a, std::size_t b, std::size_t index, double coeff);

  Eigen::MatrixXd evaluate(std::span<const double> w) const;

 private:
  std::size_t slot(std::size_t a, std::size_t b) const;

  std::string label_;
  std::size_t size_ = 0;
  std::vector<std::vector<LinearTerm>> cells_;
};

/// min <objective, w>  s.t.  every block evaluated at w is PSD, w_0 = 1.
struct MomentRelaxation {
  std::size_t n = 0;
  int k = 0;
  int k0 = 0;
  std::shared_ptr<const TmsIndex> index;
  /// Sparse objective functional; for the epigraph problem this is w_{e_n}.
  std::vector<LinearTerm> objective;
  std::vector<LinearMatrixBlock> blocks;

  std::size_t num_moments() const { return index->size(); }
  /// Index of w_{e_n}.
  std::size_t objective_index() const;
  double objective_value(std::span<const double> w) const;
};

/// Cell (alpha, beta) = w_{alpha + beta}, rows indexed by basis(n, k).
LinearMatrixBlock moment_block(std::size_t n, int k, const TmsIndex& idx);

/// Cell (alpha, beta) = sum_gamma p_gamma w_{alpha + beta + gamma}, rows indexed
/// by basis(n, k - ceil(deg p / 2)).
LinearMatrixBlock localizing_block(const Polynomial& p, std::size_t n, int k, const TmsIndex& idx);

/// Raised when the relaxation order is below ceil(deg g / 2).
class RelaxationOrderError : public std::invalid_argument {
 public:
  RelaxationOrderError(int k, int k0);
  int k0() const { return k0_; }

 private:
  int k0_;
};

MomentRelaxation assemble_relaxation(const PopInstance& pop, int k);

/// Moments of the point mass at u, up to the index degree.
std::vector<double> dirac_moments(const TmsIndex& idx, std::span<const double> u);

/// Numeric M_d[w] as the leading principal submatrix of any higher order.
Eigen::MatrixXd moment_matrix(std::span<const double> w, const TmsIndex& idx, int d);

/// SDPA sparse (.dat-s) text. w_0 is substituted by 1, variable i is w_i,
/// and constant parts enter as F_0 = -(coefficient of w_0).
std::string export_sdpa(const MomentRelaxation& relax);

}  // namespace polyact
