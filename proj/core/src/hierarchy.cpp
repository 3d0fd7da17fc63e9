#include "polyact/hierarchy.hpp"

#include <unsupported/Eigen/LevenbergMarquardt>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "json.hpp"

namespace polyact {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<double> symmetric_singular_values(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  std::vector<double> s(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) s[static_cast<std::size_t>(i)] = std::abs(es.eigenvalues()[i]);
  std::sort(s.begin(), s.end(), std::greater<>());
  return s;
}

std::size_t numerical_rank(const std::vector<double>& s, double tol) {
  if (s.empty() || !(s.front() > 0.0)) return 0;
  const double cut = tol * s.front();
  return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [cut](double v) { return v > cut; }));
}

Polynomial partial(const Polynomial& p, std::size_t i) {
  Polynomial out(p.num_vars());
  for (const auto& [m, c] : p.terms()) {
    const int e = m[i];
    if (e == 0) continue;
    std::vector<int> ex(m.exponents().begin(), m.exponents().end());
    --ex[i];
    out.add_term(Monomial(std::move(ex)), c * e);
  }
  return out;
}

struct ResidualFunctor : Eigen::DenseFunctor<double> {
  ResidualFunctor(const std::vector<Polynomial>& r, const std::vector<std::vector<Polynomial>>& jac,
                  std::size_t n, int rows)
      : DenseFunctor(static_cast<int>(n - 1), rows), r_(r), jac_(jac), z_(n, 0.0) {}

  int operator()(const InputType& x, ValueType& f) const {
    load(x);
    f.setZero(values());
    for (std::size_t j = 0; j < r_.size(); ++j) f[static_cast<Eigen::Index>(j)] = r_[j].eval(z_);
    return 0;
  }

  int df(const InputType& x, JacobianType& J) const {
    load(x);
    J.setZero(values(), inputs());
    for (std::size_t j = 0; j < r_.size(); ++j) {
      for (std::size_t i = 0; i < jac_[j].size(); ++i) {
        J(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = jac_[j][i].eval(z_);
      }
    }
    return 0;
  }

 private:
  void load(const InputType& x) const {
    for (Eigen::Index i = 0; i < x.size(); ++i) z_[static_cast<std::size_t>(i)] = x[i];
  }

  const std::vector<Polynomial>& r_;
  const std::vector<std::vector<Polynomial>>& jac_;
  mutable std::vector<double> z_;
};

std::vector<Polynomial> residual_polynomials(const PopInstance& pop) {
  std::vector<Polynomial> r;
  const Polynomial theta = Polynomial::variable(pop.n, pop.n - 1);
  for (std::size_t j = 0; j < pop.constraints.size() && j < pop.labels.size(); ++j) {
    if (pop.labels[j].kind == ConstraintLabel::Kind::ResidualPlus) r.push_back(pop.constraints[j] - theta);
  }
  return r;
}

std::span<const double> as_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace

FlatTruncationReport flat_truncation(std::span<const double> w, std::size_t n, int k, int k0, double tol) {
  FlatTruncationReport rep;
  rep.tol_used = tol;
  if (k < k0 || k0 < 0) return rep;
  const TmsIndex idx(n, 2 * k);
  if (w.size() < idx.size()) throw std::out_of_range("flat_truncation: moment sequence shorter than degree 2k");
  for (int d = std::max(k0, 1); d <= k; ++d) {
    RankLevel lvl;
    lvl.d = d;
    lvl.singular_values_d = symmetric_singular_values(moment_matrix(w, idx, d));
    lvl.singular_values_lower = symmetric_singular_values(moment_matrix(w, idx, d - k0));
    lvl.rank_d = numerical_rank(lvl.singular_values_d, tol);
    lvl.rank_lower = numerical_rank(lvl.singular_values_lower, tol);
    rep.levels.push_back(lvl);
    if (lvl.rank_d == lvl.rank_lower) {
      rep.holds = true;
      rep.d = d;
      break;
    }
  }
  if (!rep.levels.empty()) {
    const auto& last = rep.levels.back();
    rep.rank = last.rank_d;
    rep.rank_lower = last.rank_lower;
    rep.singular_values = last.singular_values_d;
    rep.singular_values_lower = last.singular_values_lower;
  }
  return rep;
}

Eigen::VectorXd degree_one_moments(std::span<const double> w, std::size_t n) {
  if (w.size() < n + 1) throw std::out_of_range("degree_one_moments: moment sequence too short");
  Eigen::VectorXd z(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) z[static_cast<Eigen::Index>(i)] = w[i + 1];
  return z;
}

Eigen::VectorXd extract_minimizer(std::span<const double> w, std::size_t n, const FlatTruncationReport& flat) {
  if (!flat.holds) throw ExtractionUnsupported("extract_minimizer: flat truncation does not hold");
  if (flat.rank != 1) {
    throw ExtractionUnsupported("extract_minimizer: rank " + std::to_string(flat.rank) +
                                " > 1; only single-atom extraction is supported");
  }
  return degree_one_moments(w, n);
}

bool certify(const PopInstance& pop, std::span<const double> z, double theta_lower, double tol) {
  if (z.size() != pop.n) throw DimensionError("certify: point has wrong length");
  if (!std::all_of(z.begin(), z.end(), [](double v) { return std::isfinite(v); })) return false;
  return pop.min_constraint(z) >= -tol && z[pop.n - 1] <= theta_lower + tol;
}

double epigraph_level(const PopInstance& pop, std::span<const double> z) {
  const double zn = z[pop.n - 1];
  double level = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < pop.constraints.size() && j < pop.labels.size(); ++j) {
    if (pop.labels[j].kind == ConstraintLabel::Kind::Box) continue;
    level = std::max(level, zn - pop.constraints[j].eval(z));
  }
  return std::isinf(level) ? zn : level;
}

RefineResult refine_candidate(const PopInstance& pop, const Eigen::VectorXd& z, double feas_tol) {
  RefineResult out{z, false, 0};
  const auto r = residual_polynomials(pop);
  if (r.empty() || pop.n < 2 || !z.allFinite()) return out;

  std::vector<std::vector<Polynomial>> jac(r.size());
  for (std::size_t j = 0; j < r.size(); ++j) {
    for (std::size_t i = 0; i + 1 < pop.n; ++i) jac[j].push_back(partial(r[j], i));
  }
  const int rows = static_cast<int>(std::max(r.size(), pop.n - 1));
  ResidualFunctor f(r, jac, pop.n, rows);
  Eigen::LevenbergMarquardt<ResidualFunctor> lm(f);
  lm.setMaxfev(2000);
  lm.setFtol(1e-16);
  lm.setXtol(1e-16);
  Eigen::VectorXd x = z.head(static_cast<Eigen::Index>(pop.n - 1));
  lm.minimize(x);
  out.evaluations = static_cast<int>(lm.nfev());
  if (!x.allFinite()) return out;

  Eigen::VectorXd cand(z.size());
  cand.head(x.size()) = x;
  cand[cand.size() - 1] = 0.0;
  cand[cand.size() - 1] = epigraph_level(pop, as_span(cand));

  Eigen::VectorXd start = z;
  start[start.size() - 1] = epigraph_level(pop, as_span(z));
  if (cand[cand.size() - 1] < start[start.size() - 1] && pop.min_constraint(as_span(cand)) >= -feas_tol) {
    out.z = cand;
    out.improved = true;
  }
  return out;
}

SolverOptions HierarchyOptions::default_solver() {
  SolverOptions s;
  s.gap_tol = 1e-10;
  s.feas_tol = 1e-10;
  s.accept_tol = 1e-8;
  return s;
}

void HierarchyOptions::validate() const {
  solver.validate();
  if (!(rank_tol > 0.0 && rank_tol < 1.0)) throw std::invalid_argument("rank_tol must lie in (0, 1)");
  if (!(cert_tol >= 0.0)) throw std::invalid_argument("cert_tol must be nonnegative");
  if (!(refine_radius >= 0.0)) throw std::invalid_argument("refine_radius must be nonnegative");
}

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::CertifiedGlobal:
      return "CertifiedGlobal";
    case Outcome::CandidateUncertified:
      return "CandidateUncertified";
    case Outcome::Exhausted:
      return "Exhausted";
  }
  return "Unknown";
}

std::string to_string(CertificateRoute r) {
  switch (r) {
    case CertificateRoute::None:
      return "none";
    case CertificateRoute::FlatTruncation:
      return "flat-truncation";
    case CertificateRoute::Gap:
      return "gap";
  }
  return "unknown";
}

std::optional<Eigen::VectorXd> HierarchyResult::coefficients() const {
  if (!z) return std::nullopt;
  return Eigen::VectorXd(z->head(z->size() - 1));
}

HierarchyResult solve_hierarchy(const PopInstance& pop, int k_max, const HierarchyOptions& opts,
                                const SdpBackend& backend) {
  opts.validate();
  const int k0 = pop.k0();
  if (k_max < k0) throw RelaxationOrderError(k_max, k0);
  const auto t_start = Clock::now();

  HierarchyResult res;
  res.backend = backend.name();
  std::optional<Eigen::VectorXd> last_z;
  double last_lb = 0.0;

  for (int k = k0; k <= k_max; ++k) {
    OrderRecord rec;
    rec.k = k;
    auto t0 = Clock::now();
    const MomentRelaxation relax = assemble_relaxation(pop, k);
    rec.assemble_seconds = seconds_since(t0);
    rec.num_moments = relax.num_moments();
    rec.num_blocks = relax.blocks.size();

    t0 = Clock::now();
    const SdpSolution sol = backend.solve(relax, opts.solver);
    rec.solve_seconds = seconds_since(t0);
    rec.theta_mom = sol.primal_obj;
    rec.theta_sos = sol.dual_obj;
    rec.status = sol.status;
    rec.residuals = sol.residuals;
    rec.iterations = sol.iterations;
    rec.solver_message = sol.message;
    if (sol.status == SolveStatus::NumericalFailure && !res.failure_order) res.failure_order = k;

    const bool finite = sol.w.size() >= relax.num_moments() &&
                        std::all_of(sol.w.begin(), sol.w.end(), [](double v) { return std::isfinite(v); });
    bool certified = false;
    Eigen::VectorXd zc;
    const double lb = std::min(sol.primal_obj, sol.dual_obj);
    if (finite && sol.status != SolveStatus::Infeasible) {
      t0 = Clock::now();
      const auto& r = sol.residuals;
      const bool usable = sol.status == SolveStatus::Optimal ||
                          std::max({r.primal_infeasibility, r.dual_infeasibility, r.relative_gap}) <= opts.cert_tol;
      rec.flat = flat_truncation(sol.w, pop.n, k, k0, opts.rank_tol);
      Eigen::VectorXd z = degree_one_moments(sol.w, pop.n);
      z[z.size() - 1] = epigraph_level(pop, as_span(z));
      const bool rank_one = rec.flat->holds && rec.flat->rank == 1;
      zc = rank_one ? extract_minimizer(sol.w, pop.n, *rec.flat) : z;
      zc[zc.size() - 1] = z[z.size() - 1];
      bool polished = false;
      if (opts.refine) {
        auto rr = refine_candidate(pop, zc);
        const Eigen::Index nc = zc.size() - 1;
        const double moved = (rr.z.head(nc) - zc.head(nc)).lpNorm<Eigen::Infinity>();
        if (rr.improved && moved <= opts.refine_radius * (1.0 + zc.head(nc).lpNorm<Eigen::Infinity>())) {
          zc = rr.z;
          polished = true;
        }
      }
      certified = usable && certify(pop, as_span(zc), lb, opts.cert_tol);
      if (certified) {
        res.route = rank_one ? CertificateRoute::FlatTruncation : CertificateRoute::Gap;
        res.refined = polished;
      }
      rec.candidate = zc;
      rec.candidate_loss = zc[zc.size() - 1];
      rec.certified = certified;
      rec.extract_seconds = seconds_since(t0);
      last_z = z;
      last_lb = lb;
    }
    res.orders.push_back(std::move(rec));

    if (certified) {
      res.outcome = Outcome::CertifiedGlobal;
      res.z = zc;
      res.theta = zc[zc.size() - 1];
      res.lower_bound = lb;
      res.gap = res.theta - lb;
      res.total_seconds = seconds_since(t_start);
      return res;
    }
  }

  if (last_z) {
    Eigen::VectorXd z = *last_z;
    if (opts.refine) {
      auto rr = refine_candidate(pop, z);
      if (rr.improved) {
        z = rr.z;
        res.refined = true;
      }
    }
    res.outcome = Outcome::CandidateUncertified;
    res.z = z;
    res.theta = z[z.size() - 1];
    res.lower_bound = last_lb;
    res.gap = res.theta - last_lb;
  }
  res.total_seconds = seconds_since(t_start);
  return res;
}

std::string to_json(const HierarchyResult& r, const std::vector<std::string>& variable_names, int indent) {
  using nlohmann::ordered_json;
  auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };

  ordered_json j;
  j["outcome"] = to_string(r.outcome);
  j["route"] = to_string(r.route);
  j["backend"] = r.backend;
  if (r.z) {
    j["z"] = vec(*r.z);
    const auto c = *r.coefficients();
    ordered_json coeffs = ordered_json::object();
    for (Eigen::Index i = 0; i < c.size(); ++i) {
      const auto ui = static_cast<std::size_t>(i);
      coeffs[ui < variable_names.size() ? variable_names[ui] : "z" + std::to_string(i + 1)] = c[i];
    }
    j["coefficients"] = coeffs;
    j["theta"] = r.theta;
    j["lower_bound"] = r.lower_bound;
    j["gap"] = r.gap;
  } else {
    j["z"] = nullptr;
  }
  j["refined"] = r.refined;
  j["failure_order"] = r.failure_order ? ordered_json(*r.failure_order) : ordered_json(nullptr);

  ordered_json orders = ordered_json::array();
  for (const auto& o : r.orders) {
    ordered_json e;
    e["k"] = o.k;
    e["theta_mom"] = o.theta_mom;
    e["theta_sos"] = o.theta_sos;
    e["status"] = to_string(o.status);
    e["iterations"] = o.iterations;
    e["primal_infeasibility"] = o.residuals.primal_infeasibility;
    e["dual_infeasibility"] = o.residuals.dual_infeasibility;
    e["relative_gap"] = o.residuals.relative_gap;
    e["moments"] = o.num_moments;
    e["blocks"] = o.num_blocks;
    if (o.flat) {
      ordered_json f;
      f["holds"] = o.flat->holds;
      f["d"] = o.flat->d ? ordered_json(*o.flat->d) : ordered_json(nullptr);
      f["rank"] = o.flat->rank;
      f["rank_lower"] = o.flat->rank_lower;
      f["tol"] = o.flat->tol_used;
      ordered_json lv = ordered_json::array();
      for (const auto& l : o.flat->levels) {
        lv.push_back({{"d", l.d},
                      {"rank_d", l.rank_d},
                      {"rank_lower", l.rank_lower},
                      {"singular_values_d", l.singular_values_d},
                      {"singular_values_lower", l.singular_values_lower}});
      }
      f["levels"] = lv;
      e["flat_truncation"] = f;
    } else {
      e["flat_truncation"] = nullptr;
    }
    e["candidate"] = o.candidate ? ordered_json(vec(*o.candidate)) : ordered_json(nullptr);
    e["candidate_loss"] = o.candidate_loss;
    e["certified"] = o.certified;
    e["seconds"] = {{"assemble", o.assemble_seconds}, {"solve", o.solve_seconds}, {"extract", o.extract_seconds}};
    orders.push_back(e);
  }
  j["orders"] = orders;
  j["total_seconds"] = r.total_seconds;
  return j.dump(indent);
}

}  // namespace polyact
