#include "polyact/momentsdp.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>
#include <tuple>

namespace polyact {

TmsIndex::TmsIndex(std::size_t n, int degree) : basis_(n, degree) {
  position_.reserve(basis_.size());
  for (std::size_t i = 0; i < basis_.size(); ++i) position_.emplace(basis_[i], i);
}

std::size_t TmsIndex::index_of(const Monomial& alpha) const {
  auto it = position_.find(alpha);
  if (it == position_.end()) {
    throw std::out_of_range("TmsIndex: power of degree " + std::to_string(alpha.degree()) +
                            " outside truncation degree " + std::to_string(degree()));
  }
  return it->second;
}

LinearMatrixBlock::LinearMatrixBlock(std::string label, std::size_t size)
    : label_(std::move(label)), size_(size), cells_(size * (size + 1) / 2) {}

std::size_t LinearMatrixBlock::slot(std::size_t a, std::size_t b) const {
  if (a > b) std::swap(a, b);
  if (b >= size_) throw std::out_of_range("LinearMatrixBlock: cell out of range");
  // Row-major upper triangle.
  return a * size_ - a * (a + 1) / 2 + b;
}

const std::vector<LinearTerm>& LinearMatrixBlock::at(std::size_t a, std::size_t b) const {
  return cells_[slot(a, b)];
}

void LinearMatrixBlock::add(std::size_t a, std::size_t b, std::size_t index, double coeff) {
  if (coeff == 0.0) return;
  auto& cell = cells_[slot(a, b)];
  for (auto& t : cell) {
    if (t.index == index) {
      t.coeff += coeff;
      return;
    }
  }
  cell.push_back({index, coeff});
}

Eigen::MatrixXd LinearMatrixBlock::evaluate(std::span<const double> w) const {
  const auto s = static_cast<Eigen::Index>(size_);
  Eigen::MatrixXd m(s, s);
  for (std::size_t a = 0; a < size_; ++a) {
    for (std::size_t b = a; b < size_; ++b) {
      double v = 0.0;
      for (const auto& t : at(a, b)) v += t.coeff * w[t.index];
      m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = v;
      m(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = v;
    }
  }
  return m;
}

std::size_t MomentRelaxation::objective_index() const { return index->index_of(Monomial::unit(n, n - 1)); }

double MomentRelaxation::objective_value(std::span<const double> w) const {
  double v = 0.0;
  for (const auto& t : objective) v += t.coeff * w[t.index];
  return v;
}

LinearMatrixBlock moment_block(std::size_t n, int k, const TmsIndex& idx) {
  return localizing_block(Polynomial::constant(n, 1.0), n, k, idx);
}

LinearMatrixBlock localizing_block(const Polynomial& p, std::size_t n, int k, const TmsIndex& idx) {
  if (p.num_vars() != n || idx.num_vars() != n) throw DimensionError("localizing_block: variable count mismatch");
  const int half = (p.degree() + 1) / 2;
  const int k1 = k - half;
  if (k1 < 0) throw RelaxationOrderError(k, half);
  if (2 * k1 + p.degree() > idx.degree()) {
    throw std::out_of_range("localizing_block: moment index too short for order " + std::to_string(k));
  }
  const MonomialBasis rows(n, k1);
  LinearMatrixBlock block(p.is_zero() ? "zero" : "L", rows.size());
  for (std::size_t a = 0; a < rows.size(); ++a) {
    for (std::size_t b = a; b < rows.size(); ++b) {
      const Monomial ab = rows[a] * rows[b];
      for (const auto& [gamma, coeff] : p.terms()) block.add(a, b, idx.index_of(ab * gamma), coeff);
    }
  }
  return block;
}

RelaxationOrderError::RelaxationOrderError(int k, int k0)
    : std::invalid_argument("relaxation order k = " + std::to_string(k) +
                            " is below the minimum order k0 = " + std::to_string(k0)),
      k0_(k0) {}

MomentRelaxation assemble_relaxation(const PopInstance& pop, int k) {
  const int k0 = pop.k0();
  if (k < k0) throw RelaxationOrderError(k, k0);

  MomentRelaxation relax;
  relax.n = pop.n;
  relax.k = k;
  relax.k0 = k0;
  relax.index = std::make_shared<TmsIndex>(pop.n, 2 * k);
  for (const auto& [m, c] : pop.objective.terms()) relax.objective.push_back({relax.index->index_of(m), c});

  relax.blocks.push_back(moment_block(pop.n, k, *relax.index));
  relax.blocks.back().set_label("M");
  for (std::size_t j = 0; j < pop.constraints.size(); ++j) {
    LinearMatrixBlock b = localizing_block(pop.constraints[j], pop.n, k, *relax.index);
    b.set_label("L" + std::to_string(j + 1) +
                (j < pop.labels.size() ? "[" + pop.labels[j].to_string() + "]" : ""));
    relax.blocks.push_back(std::move(b));
  }
  return relax;
}

std::vector<double> dirac_moments(const TmsIndex& idx, std::span<const double> u) {
  if (u.size() != idx.num_vars()) throw DimensionError("dirac_moments: point has wrong length");
  std::vector<double> w(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) w[i] = idx.power(i).eval(u);
  return w;
}

Eigen::MatrixXd moment_matrix(std::span<const double> w, const TmsIndex& idx, int d) {
  if (2 * d > idx.degree()) throw std::out_of_range("moment_matrix: order exceeds moment degree");
  const std::size_t s = binomial(idx.num_vars() + static_cast<std::size_t>(d), static_cast<std::size_t>(d));
  Eigen::MatrixXd m(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(s));
  for (std::size_t a = 0; a < s; ++a) {
    for (std::size_t b = a; b < s; ++b) {
      const double v = w[idx.index_of(idx.power(a) * idx.power(b))];
      m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = v;
      m(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = v;
    }
  }
  return m;
}

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string export_sdpa(const MomentRelaxation& relax) {
  const std::size_t m = relax.num_moments() - 1;
  std::ostringstream os;

  os << "\"polyact moment relaxation: n=" << relax.n << " k=" << relax.k << " k0=" << relax.k0
     << " moments=" << relax.num_moments() << "\n";
  os << "\"blocks:";
  for (const auto& b : relax.blocks) os << ' ' << b.label() << '(' << b.size() << ')';
  os << "\n";

  os << m << "\n" << relax.blocks.size() << "\n";
  for (std::size_t b = 0; b < relax.blocks.size(); ++b) {
    os << (b ? " " : "") << relax.blocks[b].size();
  }
  os << "\n";

  std::vector<double> c(m, 0.0);
  for (const auto& t : relax.objective) {
    if (t.index > 0) c[t.index - 1] += t.coeff;
  }
  for (std::size_t i = 0; i < m; ++i) os << (i ? " " : "") << fmt17(c[i]);
  os << "\n";

  // (matrix number, block, row, col) -> value; std::map keeps emission order fixed.
  std::map<std::tuple<std::size_t, std::size_t, std::size_t, std::size_t>, double> entries;
  for (std::size_t b = 0; b < relax.blocks.size(); ++b) {
    const auto& blk = relax.blocks[b];
    for (std::size_t r = 0; r < blk.size(); ++r) {
      for (std::size_t col = r; col < blk.size(); ++col) {
        for (const auto& t : blk.at(r, col)) {
          const double v = t.index == 0 ? -t.coeff : t.coeff;
          entries[{t.index, b + 1, r + 1, col + 1}] += v;
        }
      }
    }
  }
  for (const auto& [key, v] : entries) {
    if (v == 0.0) continue;
    const auto& [mat, blk, r, col] = key;
    os << mat << ' ' << blk << ' ' << r << ' ' << col << ' ' << fmt17(v) << "\n";
  }
  return os.str();
}

}  // namespace polyact
