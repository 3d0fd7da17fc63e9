#include "polyact/popbuild.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace polyact {

std::string ConstraintLabel::to_string() const {
  switch (kind) {
    case Kind::ResidualPlus:
      return "r" + std::to_string(index + 1) + "+";
    case Kind::ResidualMinus:
      return "r" + std::to_string(index + 1) + "-";
    case Kind::Box:
      return "box" + std::to_string(index + 1);
  }
  return "?";
}

int PopInstance::constraint_degree() const {
  int d = 1;
  for (const auto& g : constraints) d = std::max(d, g.degree());
  return d;
}

int PopInstance::k0() const { return (constraint_degree() + 1) / 2; }

double PopInstance::min_constraint(std::span<const double> z) const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& g : constraints) m = std::min(m, g.eval(z));
  return m;
}

std::string PopInstance::dump() const {
  std::ostringstream os;
  os << "variables (" << n << "):";
  for (const auto& name : variable_names) os << ' ' << name;
  os << "\nminimize " << objective.to_string(variable_names) << "\n";
  for (std::size_t j = 0; j < constraints.size(); ++j) {
    os << "g" << j + 1 << " [" << labels[j].to_string() << "]: "
       << constraints[j].to_string(variable_names) << " >= 0\n";
  }
  os << "k0 = " << k0() << "\n";
  return os.str();
}

ResidualSystem averaged_residual(const NetworkSpec& net, const TrainingSet& data) {
  data.validate_against(net);
  const std::size_t nc = net.num_coefficients();
  const std::size_t n = nc + 1;
  const auto m_out = static_cast<std::size_t>(net.output_dim());
  const double inv_n = 1.0 / static_cast<double>(data.size());

  std::vector<Polynomial> acc(m_out, Polynomial(nc));
  Eigen::VectorXd ybar = Eigen::VectorXd::Zero(net.output_dim());
  for (const auto& s : data.samples) {
    const auto f = symbolic_forward(net, s.x);
    for (std::size_t j = 0; j < m_out; ++j) acc[j] += f[j];
    ybar += s.y;
  }
  ybar *= inv_n;

  ResidualSystem out;
  out.num_vars = n;
  for (std::size_t j = 0; j < m_out; ++j) {
    acc[j] *= inv_n;
    acc[j].add_term(Monomial(nc), -ybar[static_cast<Eigen::Index>(j)]);
    out.fhat_minus_yhat.push_back(acc[j].embed(n));
  }
  return out;
}

PopInstance build_pop(const ResidualSystem& residual, std::vector<std::string> variable_names,
                      const PopOptions& opts) {
  const std::size_t n = residual.num_vars;
  if (variable_names.size() != n) throw DimensionError("build_pop: need one name per variable");
  PopInstance pop;
  pop.n = n;
  pop.variable_names = std::move(variable_names);
  pop.objective = Polynomial::variable(n, n - 1);
  for (std::size_t j = 0; j < residual.fhat_minus_yhat.size(); ++j) {
    const auto& r = residual.fhat_minus_yhat[j];
    pop.constraints.push_back(pop.objective + r);
    pop.labels.push_back({ConstraintLabel::Kind::ResidualPlus, static_cast<int>(j)});
    pop.constraints.push_back(pop.objective - r);
    pop.labels.push_back({ConstraintLabel::Kind::ResidualMinus, static_cast<int>(j)});
  }
  if (opts.box_radius) {
    const double r2 = *opts.box_radius * *opts.box_radius;
    for (std::size_t i = 0; i < n; ++i) {
      Polynomial g = Polynomial::constant(n, r2);
      g.add_term(Monomial(n) * Monomial::unit(n, i) * Monomial::unit(n, i), -1.0);
      pop.constraints.push_back(std::move(g));
      pop.labels.push_back({ConstraintLabel::Kind::Box, static_cast<int>(i)});
    }
  }
  return pop;
}

PopInstance build_pop(const NetworkSpec& net, const TrainingSet& data, const PopOptions& opts) {
  auto names = net.coefficient_names();
  names.push_back("theta");
  return build_pop(averaged_residual(net, data), std::move(names), opts);
}

Eigen::VectorXd averaged_residual_value(const NetworkSpec& net, const TrainingSet& data,
                                        const CoefficientVector& c) {
  data.validate_against(net);
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(net.output_dim());
  for (const auto& s : data.samples) acc += numeric_forward(net, c, s.x) - s.y;
  return acc / static_cast<double>(data.size());
}

double loss_eval(const NetworkSpec& net, const TrainingSet& data, const CoefficientVector& c) {
  return averaged_residual_value(net, data, c).lpNorm<Eigen::Infinity>();
}

}  // namespace polyact
