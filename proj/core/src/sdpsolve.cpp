#include "polyact/sdpsolve.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace polyact {

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal:
      return "Optimal";
    case SolveStatus::MaxIterations:
      return "MaxIterations";
    case SolveStatus::NumericalFailure:
      return "NumericalFailure";
    case SolveStatus::Infeasible:
      return "Infeasible";
  }
  return "Unknown";
}

void SolverOptions::validate() const {
  if (!(gap_tol > 0.0) || !(feas_tol > 0.0)) throw std::invalid_argument("solver tolerances must be positive");
  if (!(step_fraction > 0.0 && step_fraction < 1.0)) {
    throw std::invalid_argument("step_fraction must lie in (0, 1)");
  }
  if (accept_tol && !(*accept_tol >= gap_tol && *accept_tol >= feas_tol)) {
    throw std::invalid_argument("accept_tol must not be tighter than gap_tol and feas_tol");
  }
  if (max_iters < 1) throw std::invalid_argument("max_iters must be positive");
  if (initial_point_scale && !(*initial_point_scale > 0.0)) {
    throw std::invalid_argument("initial_point_scale must be positive");
  }
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kStallWindow = 10;

struct SymEntry {
  int r;
  int c;
  double v;
};

/// One LMI block C + sum_i x_i A_i, stored per variable with both triangles
/// expanded so that A_i . M is a plain sum over entries.
struct Block {
  std::string label;
  int size = 0;
  double scale = 1.0;
  MatrixXd C;
  std::vector<int> vars;
  std::vector<std::vector<SymEntry>> A;
};

struct LmiData {
  int m = 0;
  std::vector<std::size_t> moment_of;
  VectorXd c;
  double c_scale = 1.0;
  double c_const = 0.0;
  std::vector<Block> blocks;
  int total_dim = 0;
  bool unbounded = false;
};

LmiData build_lmi(const MomentRelaxation& relax, bool scale_blocks) {
  LmiData d;
  const std::size_t len = relax.num_moments();
  std::vector<int> compact(len, -1);
  for (const auto& blk : relax.blocks) {
    for (std::size_t a = 0; a < blk.size(); ++a)
      for (std::size_t b = a; b < blk.size(); ++b)
        for (const auto& t : blk.at(a, b))
          if (t.index > 0 && t.coeff != 0.0) compact[t.index] = 0;
  }
  for (std::size_t i = 1; i < len; ++i) {
    if (compact[i] == 0) {
      compact[i] = d.m++;
      d.moment_of.push_back(i);
    }
  }

  d.c = VectorXd::Zero(d.m);
  for (const auto& t : relax.objective) {
    if (t.index == 0) {
      d.c_const += t.coeff;
    } else if (compact[t.index] < 0) {
      if (t.coeff != 0.0) d.unbounded = true;
    } else {
      d.c[compact[t.index]] += t.coeff;
    }
  }
  const double cmax = d.m > 0 ? d.c.cwiseAbs().maxCoeff() : 0.0;
  d.c_scale = cmax > 0.0 ? cmax : 1.0;
  d.c /= d.c_scale;

  std::vector<int> slot(static_cast<std::size_t>(d.m), -1);
  for (const auto& blk : relax.blocks) {
    Block out;
    out.label = blk.label();
    out.size = static_cast<int>(blk.size());
    out.C = MatrixXd::Zero(out.size, out.size);
    for (std::size_t a = 0; a < blk.size(); ++a) {
      for (std::size_t b = a; b < blk.size(); ++b) {
        for (const auto& t : blk.at(a, b)) {
          const int r = static_cast<int>(a), c = static_cast<int>(b);
          if (t.index == 0) {
            out.C(r, c) += t.coeff;
            if (r != c) out.C(c, r) += t.coeff;
            continue;
          }
          const int v = compact[t.index];
          if (v < 0) continue;
          if (slot[static_cast<std::size_t>(v)] < 0) {
            slot[static_cast<std::size_t>(v)] = static_cast<int>(out.vars.size());
            out.vars.push_back(v);
            out.A.emplace_back();
          }
          auto& entries = out.A[static_cast<std::size_t>(slot[static_cast<std::size_t>(v)])];
          entries.push_back({r, c, t.coeff});
          if (r != c) entries.push_back({c, r, t.coeff});
        }
      }
    }
    for (int v : out.vars) slot[static_cast<std::size_t>(v)] = -1;

    // Variables ascending so that Schur contributions land in the lower triangle.
    std::vector<std::size_t> order(out.vars.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto x, auto y) { return out.vars[x] < out.vars[y]; });
    std::vector<int> vars;
    std::vector<std::vector<SymEntry>> A;
    for (auto i : order) {
      vars.push_back(out.vars[i]);
      A.push_back(std::move(out.A[i]));
    }
    out.vars = std::move(vars);
    out.A = std::move(A);

    if (scale_blocks) {
      double s = out.C.cwiseAbs().maxCoeff();
      for (const auto& ent : out.A)
        for (const auto& e : ent) s = std::max(s, std::abs(e.v));
      if (s > 0.0) {
        out.scale = s;
        out.C /= s;
        for (auto& ent : out.A)
          for (auto& e : ent) e.v /= s;
      }
    }
    d.total_dim += out.size;
    d.blocks.push_back(std::move(out));
  }
  return d;
}

MatrixXd apply_block(const Block& b, const VectorXd& x) {
  MatrixXd S = MatrixXd::Zero(b.size, b.size);
  for (std::size_t i = 0; i < b.vars.size(); ++i) {
    const double xi = x[b.vars[i]];
    if (xi == 0.0) continue;
    for (const auto& e : b.A[i]) S(e.r, e.c) += xi * e.v;
  }
  return S;
}

/// out_i += A_i . M over the block's variables.
void adjoint_add(const Block& b, const MatrixXd& M, VectorXd& out) {
  for (std::size_t i = 0; i < b.vars.size(); ++i) {
    double s = 0.0;
    for (const auto& e : b.A[i]) s += e.v * M(e.r, e.c);
    out[b.vars[i]] += s;
  }
}

double inner(const MatrixXd& a, const MatrixXd& b) { return a.cwiseProduct(b).sum(); }

MatrixXd sym(const MatrixXd& m) { return 0.5 * (m + m.transpose()); }

/// Largest alpha with P + alpha * D still PSD, given chol(P).
double max_step(const Eigen::LLT<MatrixXd>& chol, const MatrixXd& D) {
  const auto L = chol.matrixL();
  MatrixXd T = L.solve(D);
  MatrixXd M = L.solve(T.transpose());
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym(M), Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues()(0);
  return lmin < 0.0 ? -1.0 / lmin : kInf;
}

/// Cholesky of the Schur complement. Once roundoff has cost it definiteness,
/// falls back to pivoted LDLT and then to a small diagonal shift.
struct SchurFactor {
  Eigen::LLT<MatrixXd, Eigen::Lower> llt;
  Eigen::LDLT<MatrixXd, Eigen::Lower> ldlt;
  bool pivoted = false;

  bool compute(const MatrixXd& B) {
    pivoted = false;
    llt.compute(B);
    if (llt.info() == Eigen::Success) return true;
    ldlt.compute(B);
    if (ldlt.info() == Eigen::Success) {
      const auto D = ldlt.vectorD();
      const double dmax = D.cwiseAbs().maxCoeff();
      if (dmax > 0.0 && D.minCoeff() > -1e-8 * dmax) {
        pivoted = true;
        return true;
      }
    }
    const double dmax = std::max(B.diagonal().cwiseAbs().maxCoeff(), 1.0);
    for (double reg = 1e-14; reg <= 1e-8; reg *= 100.0) {
      MatrixXd Br = B;
      Br.diagonal().array() += reg * dmax;
      llt.compute(Br);
      if (llt.info() == Eigen::Success) return true;
    }
    return false;
  }
  VectorXd solve(const VectorXd& r) const { return pivoted ? VectorXd(ldlt.solve(r)) : VectorXd(llt.solve(r)); }
};

struct Iterate {
  VectorXd x;
  std::vector<MatrixXd> X;
  std::vector<MatrixXd> Y;
};

class IpmRun {
 public:
  IpmRun(const LmiData& data, const SolverOptions& opts) : d_(data), opts_(opts) {}

  SdpSolution run();

 private:
  struct Metrics {
    double pobj, dobj, mu, pinf, dinf, gap;
  };

  Metrics evaluate(const Iterate& it);
  void build_schur(const std::vector<MatrixXd>& G, const std::vector<MatrixXd>& Y, MatrixXd& B) const;
  SdpSolution finish(const Iterate& it, const Metrics& m, SolveStatus status, int iters,
                     std::string message) const;

  const LmiData& d_;
  const SolverOptions& opts_;
  std::vector<MatrixXd> Rp_;
  VectorXd Rd_;
  double norm_c_ = 0.0;
  double norm_C_ = 0.0;
};

IpmRun::Metrics IpmRun::evaluate(const Iterate& it) {
  Metrics m{};
  m.pobj = d_.c.dot(it.x);
  m.dobj = 0.0;
  double xy = 0.0;
  double rp2 = 0.0;
  Rp_.resize(d_.blocks.size());
  Rd_ = d_.c;
  VectorXd aty = VectorXd::Zero(d_.m);
  for (std::size_t b = 0; b < d_.blocks.size(); ++b) {
    const auto& blk = d_.blocks[b];
    Rp_[b] = blk.C + apply_block(blk, it.x) - it.X[b];
    rp2 += Rp_[b].squaredNorm();
    m.dobj -= inner(blk.C, it.Y[b]);
    xy += inner(it.X[b], it.Y[b]);
    adjoint_add(blk, it.Y[b], aty);
  }
  Rd_ -= aty;
  m.mu = xy / d_.total_dim;
  m.pinf = std::sqrt(rp2) / (1.0 + norm_C_);
  m.dinf = Rd_.norm() / (1.0 + norm_c_);
  m.gap = std::abs(m.pobj - m.dobj) / (1.0 + std::abs(m.pobj) + std::abs(m.dobj));
  return m;
}

void IpmRun::build_schur(const std::vector<MatrixXd>& G, const std::vector<MatrixXd>& Y, MatrixXd& B) const {
  B.setZero(d_.m, d_.m);
  for (std::size_t b = 0; b < d_.blocks.size(); ++b) {
    const auto& blk = d_.blocks[b];
    const auto& Gb = G[b];
    const auto& Yb = Y[b];
    MatrixXd T(blk.size, blk.size);
    for (std::size_t ii = 0; ii < blk.vars.size(); ++ii) {
      // T = G A_i Y, so that B_ij += A_j . T.
      T.setZero();
      for (const auto& e : blk.A[ii]) T.noalias() += e.v * Gb.col(e.r) * Yb.row(e.c);
      const int i = blk.vars[ii];
      for (std::size_t jj = ii; jj < blk.vars.size(); ++jj) {
        double s = 0.0;
        for (const auto& e : blk.A[jj]) s += e.v * T(e.r, e.c);
        B(blk.vars[jj], i) += s;
      }
    }
  }
}

SdpSolution IpmRun::finish(const Iterate& it, const Metrics& m, SolveStatus status, int iters,
                           std::string message) const {
  SdpSolution sol;
  sol.status = status;
  sol.iterations = iters;
  sol.message = std::move(message);
  sol.residuals = {m.pinf, m.dinf, m.gap};
  sol.primal_obj = d_.c_scale * m.pobj + d_.c_const;
  sol.dual_obj = d_.c_scale * m.dobj + d_.c_const;
  const std::size_t len = d_.moment_of.empty() ? 1 : d_.moment_of.back() + 1;
  sol.w.assign(len, 0.0);
  sol.w[0] = 1.0;
  for (int i = 0; i < d_.m; ++i) sol.w[d_.moment_of[static_cast<std::size_t>(i)]] = it.x[i];
  for (std::size_t b = 0; b < d_.blocks.size(); ++b) {
    sol.dual_blocks.push_back(it.Y[b] * (d_.c_scale / d_.blocks[b].scale));
  }
  return sol;
}

SdpSolution IpmRun::run() {
  norm_c_ = d_.c.norm();
  norm_C_ = 0.0;
  for (const auto& blk : d_.blocks) norm_C_ = std::max(norm_C_, blk.C.norm());

  double lambda = 0.0;
  if (opts_.initial_point_scale) {
    lambda = *opts_.initial_point_scale;
  } else {
    // Scaled blocks have entries of magnitude <= 1; start well inside the cone.
    int smax = 1;
    for (const auto& blk : d_.blocks) smax = std::max(smax, blk.size);
    lambda = std::max(10.0, 10.0 * std::sqrt(static_cast<double>(smax)));
  }

  Iterate it;
  it.x = VectorXd::Zero(d_.m);
  for (const auto& blk : d_.blocks) {
    it.X.push_back(lambda * MatrixXd::Identity(blk.size, blk.size));
    it.Y.push_back(lambda * MatrixXd::Identity(blk.size, blk.size));
  }

  std::vector<IterationRecord> history;
  Metrics m = evaluate(it);
  Iterate best = it;
  Metrics best_m = m;
  auto merit = [](const Metrics& q) { return std::max({q.pinf, q.dinf, q.gap}); };
  // Early exits report the best iterate; it still counts as optimal when it
  // meets the fallback tolerance.
  auto give_up = [&](SolveStatus status, int iters, const std::string& why) {
    if (opts_.accept_tol && merit(best_m) <= *opts_.accept_tol) {
      auto sol = finish(best, best_m, SolveStatus::Optimal, iters, "accepted best iterate (" + why + ")");
      sol.history = std::move(history);
      return sol;
    }
    auto sol = finish(best, best_m, status, iters, why);
    sol.history = std::move(history);
    return sol;
  };

  const std::size_t nb = d_.blocks.size();
  std::vector<MatrixXd> G(nb), dX(nb), dY(nb), dXa(nb), dYa(nb), R(nb);
  std::vector<Eigen::LLT<MatrixXd>> cholX(nb), cholY(nb);
  MatrixXd B;
  SchurFactor schur;
  VectorXd rhs(d_.m), dx(d_.m), dxa(d_.m);
  int stalled = 0;
  int since_best = 0;
  double last_ap = 0.0, last_ad = 0.0;

  for (int iter = 0; iter <= opts_.max_iters; ++iter) {
    if (m.pinf <= opts_.feas_tol && m.dinf <= opts_.feas_tol && m.gap <= opts_.gap_tol) {
      auto sol = finish(it, m, SolveStatus::Optimal, iter, "converged");
      sol.history = std::move(history);
      return sol;
    }
    if (iter == opts_.max_iters) break;

    // Dual ray: Y grows without bound while the dual objective keeps rising.
    if (m.dobj > 1e10 * (1.0 + std::abs(m.pobj)) && m.dinf < 1e-3) {
      auto sol = finish(it, m, SolveStatus::Infeasible, iter, "dual objective unbounded");
      sol.history = std::move(history);
      return sol;
    }

    for (std::size_t b = 0; b < nb; ++b) {
      cholX[b].compute(it.X[b]);
      cholY[b].compute(it.Y[b]);
      if (cholX[b].info() != Eigen::Success || cholY[b].info() != Eigen::Success) {
        return give_up(SolveStatus::NumericalFailure, iter, "iterate left the PSD cone");
      }
      G[b] = cholX[b].solve(MatrixXd::Identity(d_.blocks[b].size, d_.blocks[b].size));
      G[b] = sym(G[b]);
    }

    build_schur(G, it.Y, B);
    if (!schur.compute(B)) {
      return give_up(SolveStatus::NumericalFailure, iter, "Schur complement not positive definite");
    }

    // Solves for (dx, dX, dY) targeting sigma*mu, with an optional
    // second-order complementarity correction dXa dYa.
    auto direction = [&](double target, bool corrected, VectorXd& out_dx, std::vector<MatrixXd>& out_dX,
                         std::vector<MatrixXd>& out_dY) {
      rhs = -Rd_;
      for (std::size_t b = 0; b < nb; ++b) {
        MatrixXd M = target * G[b] - it.Y[b] - G[b] * Rp_[b] * it.Y[b];
        if (corrected) M.noalias() -= G[b] * dXa[b] * dYa[b];
        R[b] = sym(M);
        adjoint_add(d_.blocks[b], R[b], rhs);
      }
      out_dx = schur.solve(rhs);
      auto recover = [&] {
        for (std::size_t b = 0; b < nb; ++b) {
          const MatrixXd adx = apply_block(d_.blocks[b], out_dx);
          out_dX[b] = Rp_[b] + adx;
          out_dY[b] = R[b] - sym(G[b] * adx * it.Y[b]);
        }
      };
      recover();
      // Refine against the dual equation A*(dY) = Rd as actually evaluated;
      // cancellation in dY grows with cond(X) near the boundary.
      for (int pass = 0; pass < 2; ++pass) {
        VectorXd err = -Rd_;
        for (std::size_t b = 0; b < nb; ++b) adjoint_add(d_.blocks[b], out_dY[b], err);
        if (!err.allFinite() || err.norm() <= 1e-15 * (1.0 + Rd_.norm())) break;
        out_dx += schur.solve(err);
        recover();
      }
    };

    auto steps = [&](const std::vector<MatrixXd>& ddX, const std::vector<MatrixXd>& ddY) {
      double ap = kInf, ad = kInf;
      for (std::size_t b = 0; b < nb; ++b) {
        ap = std::min(ap, max_step(cholX[b], ddX[b]));
        ad = std::min(ad, max_step(cholY[b], ddY[b]));
      }
      return std::pair{ap, ad};
    };

    // Predictor.
    direction(0.0, false, dxa, dXa, dYa);
    auto [apa, ada] = steps(dXa, dYa);
    apa = std::min(1.0, apa);
    ada = std::min(1.0, ada);
    double mu_aff = 0.0;
    for (std::size_t b = 0; b < nb; ++b) mu_aff += inner(it.X[b] + apa * dXa[b], it.Y[b] + ada * dYa[b]);
    mu_aff /= d_.total_dim;
    double sigma = std::pow(std::max(0.0, mu_aff) / m.mu, 3.0);
    sigma = std::clamp(sigma, 0.0, 1.0);

    // Corrector.
    direction(sigma * m.mu, true, dx, dX, dY);
    auto [ap, ad] = steps(dX, dY);
    // Back off toward 0.9 after short steps to keep iterates centred.
    const double gamma = opts_.step_fraction > 0.9
                             ? 0.9 + (opts_.step_fraction - 0.9) * std::min({1.0, last_ap, last_ad})
                             : opts_.step_fraction;
    ap = std::min(1.0, gamma * ap);
    ad = std::min(1.0, gamma * ad);
    last_ap = ap;
    last_ad = ad;

    it.x += ap * dx;
    for (std::size_t b = 0; b < nb; ++b) {
      it.X[b] = sym(it.X[b] + ap * dX[b]);
      it.Y[b] = sym(it.Y[b] + ad * dY[b]);
    }
    m = evaluate(it);

    if (opts_.record_iterations) {
      history.push_back({iter + 1, d_.c_scale * m.pobj + d_.c_const, d_.c_scale * m.dobj + d_.c_const, m.mu,
                         {m.pinf, m.dinf, m.gap}, ap, ad});
    }
    if (merit(m) < merit(best_m)) {
      best = it;
      best_m = m;
      since_best = 0;
    } else if (++since_best >= kStallWindow) {
      return give_up(SolveStatus::NumericalFailure, iter + 1, "no progress since best iterate");
    }
    stalled = (ap < 1e-8 && ad < 1e-8) ? stalled + 1 : 0;
    if (stalled >= 3) {
      return give_up(SolveStatus::NumericalFailure, iter + 1, "step length collapsed");
    }
  }
  return give_up(SolveStatus::MaxIterations, opts_.max_iters, "iteration limit reached");
}

}  // namespace

SdpSolution InteriorPointSolver::solve(const MomentRelaxation& relax, const SolverOptions& opts) const {
  opts.validate();
  const LmiData data = build_lmi(relax, opts.scale_blocks);
  if (data.unbounded) {
    SdpSolution sol;
    sol.status = SolveStatus::Infeasible;
    sol.message = "objective depends on a moment that no block constrains";
    sol.w.assign(relax.num_moments(), 0.0);
    sol.w[0] = 1.0;
    sol.primal_obj = -kInf;
    sol.dual_obj = -kInf;
    return sol;
  }
  SdpSolution sol = IpmRun(data, opts).run();
  sol.w.resize(relax.num_moments(), 0.0);
  return sol;
}

SdpSolution solve_sdp(const MomentRelaxation& relax, const SolverOptions& opts) {
  return InteriorPointSolver().solve(relax, opts);
}

FeasibilityReport verify_moments(const MomentRelaxation& relax, std::span<const double> w) {
  FeasibilityReport rep;
  rep.min_eigenvalue = kInf;
  for (const auto& blk : relax.blocks) {
    const MatrixXd M = blk.evaluate(w);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(M, Eigen::EigenvaluesOnly);
    const double lmin = es.eigenvalues()(0);
    rep.blocks.push_back({blk.label(), lmin});
    rep.min_eigenvalue = std::min(rep.min_eigenvalue, lmin);
  }
  rep.objective = relax.objective_value(w);
  return rep;
}

FeasibilityReport verify_solution(const MomentRelaxation& relax, const SdpSolution& sol) {
  return verify_moments(relax, sol.w);
}

}  // namespace polyact
