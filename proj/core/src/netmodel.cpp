#include "polyact/netmodel.hpp"

#include <cmath>
#include <numeric>

namespace polyact {

namespace {

std::string dim_name(int layer) { return "m_" + std::to_string(layer); }

}  // namespace

NetworkSpec::NetworkSpec(std::vector<int> dims, std::vector<int> act_degrees,
                         std::vector<Eigen::MatrixXd> weights)
    : dims_(std::move(dims)), act_degrees_(std::move(act_degrees)), weights_(std::move(weights)) {
  if (act_degrees_.empty()) throw ShapeError("network needs at least one hidden layer");
  const std::size_t depth = act_degrees_.size();
  if (dims_.size() != depth + 2) {
    throw ShapeError("dims must list " + std::to_string(depth + 2) + " widths for " +
                     std::to_string(depth) + " hidden layers, got " + std::to_string(dims_.size()));
  }
  for (std::size_t l = 0; l < dims_.size(); ++l) {
    if (dims_[l] < 1) throw ShapeError("layer width " + dim_name(static_cast<int>(l)) + " must be positive");
  }
  for (std::size_t l = 0; l < depth; ++l) {
    if (act_degrees_[l] < 1) {
      throw ShapeError("activation degree d_" + std::to_string(l + 1) + " must be >= 1");
    }
  }
  if (weights_.size() != depth + 1) {
    throw ShapeError("expected " + std::to_string(depth + 1) + " weight matrices, got " +
                     std::to_string(weights_.size()));
  }
  for (std::size_t l = 1; l <= depth + 1; ++l) {
    const auto& w = weights_[l - 1];
    if (w.rows() != dims_[l] || w.cols() != dims_[l - 1]) {
      throw ShapeError("W_" + std::to_string(l) + " has shape " + std::to_string(w.rows()) + "x" +
                       std::to_string(w.cols()) + ", expected " + dim_name(static_cast<int>(l)) +
                       " x " + dim_name(static_cast<int>(l - 1)) + " = " +
                       std::to_string(dims_[l]) + "x" + std::to_string(dims_[l - 1]));
    }
  }
}

std::size_t NetworkSpec::num_coefficients() const {
  return static_cast<std::size_t>(std::accumulate(act_degrees_.begin(), act_degrees_.end(), 0)) + 1;
}

std::vector<int> NetworkSpec::coefficient_slots(int layer) const {
  const int depth = hidden_layers();
  if (layer < 1 || layer > depth) throw std::out_of_range("coefficient_slots: no such hidden layer");
  int offset = 0;
  for (int l = 1; l < layer; ++l) offset += act_degrees_[static_cast<std::size_t>(l - 1)];
  const int d = act_degrees_[static_cast<std::size_t>(layer - 1)];
  std::vector<int> slots(static_cast<std::size_t>(d) + 1);
  if (layer < depth) {
    slots[0] = -1;
    for (int j = 1; j <= d; ++j) slots[static_cast<std::size_t>(j)] = offset + j - 1;
  } else {
    for (int j = 0; j <= d; ++j) slots[static_cast<std::size_t>(j)] = offset + j;
  }
  return slots;
}

std::vector<std::string> NetworkSpec::coefficient_names() const {
  std::vector<std::string> names(num_coefficients());
  for (int l = 1; l <= hidden_layers(); ++l) {
    const auto slots = coefficient_slots(l);
    for (std::size_t j = 0; j < slots.size(); ++j) {
      if (slots[j] < 0) continue;
      names[static_cast<std::size_t>(slots[j])] =
          (l < 10 && j < 10) ? "c" + std::to_string(l) + std::to_string(j)
                             : "c" + std::to_string(l) + "_" + std::to_string(j);
    }
  }
  return names;
}

CoefficientVector::CoefficientVector(std::initializer_list<double> values)
    : values_(static_cast<Eigen::Index>(values.size())) {
  Eigen::Index i = 0;
  for (double v : values) values_[i++] = v;
}

void TrainingSet::validate_against(const NetworkSpec& net) const {
  if (samples.empty()) throw ShapeError("training set is empty");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].x.size() != net.input_dim()) {
      throw ShapeError("sample " + std::to_string(i) + ": x has length " +
                       std::to_string(samples[i].x.size()) + ", network input m_0 = " +
                       std::to_string(net.input_dim()));
    }
    if (samples[i].y.size() != net.output_dim()) {
      throw ShapeError("sample " + std::to_string(i) + ": y has length " +
                       std::to_string(samples[i].y.size()) + ", network output m_" +
                       std::to_string(net.hidden_layers() + 1) + " = " +
                       std::to_string(net.output_dim()));
    }
  }
}

std::vector<std::vector<double>> activation_coefficients(const NetworkSpec& net,
                                                         const CoefficientVector& c) {
  if (c.size() != net.num_coefficients()) {
    throw ShapeError("coefficient vector has length " + std::to_string(c.size()) + ", expected " +
                     std::to_string(net.num_coefficients()));
  }
  std::vector<std::vector<double>> out;
  for (int l = 1; l <= net.hidden_layers(); ++l) {
    const auto slots = net.coefficient_slots(l);
    std::vector<double> coeffs(slots.size());
    for (std::size_t j = 0; j < slots.size(); ++j) {
      coeffs[j] = slots[j] < 0 ? 1.0 : c[static_cast<std::size_t>(slots[j])];
    }
    out.push_back(std::move(coeffs));
  }
  return out;
}

std::vector<Polynomial> symbolic_forward(const NetworkSpec& net, const Eigen::VectorXd& x) {
  if (x.size() != net.input_dim()) {
    throw ShapeError("input has length " + std::to_string(x.size()) + ", network input m_0 = " +
                     std::to_string(net.input_dim()));
  }
  const std::size_t nc = net.num_coefficients();

  std::vector<Polynomial> h;
  h.reserve(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) h.push_back(Polynomial::constant(nc, x[i]));

  auto affine = [nc](const Eigen::MatrixXd& w, const std::vector<Polynomial>& in) {
    std::vector<Polynomial> out(static_cast<std::size_t>(w.rows()), Polynomial(nc));
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      auto& acc = out[static_cast<std::size_t>(r)];
      for (Eigen::Index col = 0; col < w.cols(); ++col) {
        if (w(r, col) != 0.0) acc += w(r, col) * in[static_cast<std::size_t>(col)];
      }
    }
    return out;
  };

  for (int l = 1; l <= net.hidden_layers(); ++l) {
    const auto v = affine(net.weights()[static_cast<std::size_t>(l - 1)], h);
    const auto slots = net.coefficient_slots(l);
    // compose_affine expects the highest degree first.
    std::vector<Polynomial> coeffs;
    coeffs.reserve(slots.size());
    for (auto it = slots.rbegin(); it != slots.rend(); ++it) {
      coeffs.push_back(*it < 0 ? Polynomial::constant(nc, 1.0)
                               : Polynomial::variable(nc, static_cast<std::size_t>(*it)));
    }
    h = compose_affine(std::span<const Polynomial>(coeffs), std::span<const Polynomial>(v));
  }
  return affine(net.weights().back(), h);
}

Eigen::VectorXd numeric_forward(const NetworkSpec& net, const CoefficientVector& c,
                                const Eigen::VectorXd& x) {
  if (x.size() != net.input_dim()) {
    throw ShapeError("input has length " + std::to_string(x.size()) + ", network input m_0 = " +
                     std::to_string(net.input_dim()));
  }
  const auto coeffs = activation_coefficients(net, c);
  Eigen::VectorXd h = x;
  for (int l = 1; l <= net.hidden_layers(); ++l) {
    const Eigen::VectorXd v = net.weights()[static_cast<std::size_t>(l - 1)] * h;
    const auto& p = coeffs[static_cast<std::size_t>(l - 1)];
    h.resize(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      double acc = p.back();
      for (std::size_t j = p.size() - 1; j-- > 0;) acc = acc * v[i] + p[j];
      h[i] = acc;
    }
  }
  return net.weights().back() * h;
}

NetworkSpec random_network(std::vector<int> dims, std::vector<int> act_degrees,
                           std::mt19937_64& rng, WeightInit init) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Eigen::MatrixXd> weights;
  for (std::size_t l = 1; l < dims.size(); ++l) {
    if (dims[l] < 1 || dims[l - 1] < 1) throw ShapeError("layer widths must be positive");
    Eigen::MatrixXd w(dims[l], dims[l - 1]);
    const double scale = 1.0 / std::sqrt(static_cast<double>(dims[l - 1]));
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      for (Eigen::Index i = 0; i < w.rows(); ++i) {
        w(i, j) = init == WeightInit::StandardNormal ? normal(rng) : scale * unif(rng);
      }
    }
    weights.push_back(std::move(w));
  }
  return NetworkSpec(std::move(dims), std::move(act_degrees), std::move(weights));
}

CoefficientVector random_coefficients(const NetworkSpec& net, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  Eigen::VectorXd c(static_cast<Eigen::Index>(net.num_coefficients()));
  for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = unif(rng);
  return CoefficientVector(std::move(c));
}

TrainingSet generate_synthetic(const NetworkSpec& net, std::size_t num_samples,
                               double noise_scale, std::uint64_t seed,
                               std::optional<CoefficientVector> c_true, NoisePolicy policy) {
  if (num_samples < 1) throw std::invalid_argument("generate_synthetic: need at least one sample");
  if (!(noise_scale >= 0.0)) throw std::invalid_argument("generate_synthetic: noise_scale must be >= 0");

  std::mt19937_64 rng(seed);
  if (!c_true) c_true = random_coefficients(net, rng);
  if (c_true->size() != net.num_coefficients()) {
    throw ShapeError("c_true has length " + std::to_string(c_true->size()) + ", expected " +
                     std::to_string(net.num_coefficients()));
  }

  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto draw_noise = [&] {
    Eigen::VectorXd e(net.output_dim());
    for (Eigen::Index j = 0; j < e.size(); ++j) e[j] = noise_scale * gauss(rng);
    return e;
  };

  TrainingSet data;
  Provenance prov{*c_true, {}, seed, noise_scale, policy};
  Eigen::VectorXd shared;
  if (policy == NoisePolicy::Shared) shared = draw_noise();

  for (std::size_t i = 0; i < num_samples; ++i) {
    Eigen::VectorXd x(net.input_dim());
    for (Eigen::Index j = 0; j < x.size(); ++j) x[j] = unif(rng);
    Eigen::VectorXd eps = policy == NoisePolicy::Shared ? shared : draw_noise();
    Eigen::VectorXd y = numeric_forward(net, *c_true, x) + eps;
    data.samples.push_back({std::move(x), std::move(y)});
    prov.noise.push_back(std::move(eps));
  }
  data.provenance = std::move(prov);
  return data;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> scale_equivalence_witness(
    const NetworkSpec& net, std::span<const double> c_with_c10, double tau,
    const Eigen::VectorXd& x) {
  if (tau == 0.0) throw std::invalid_argument("scale_equivalence_witness: tau must be nonzero");
  if (net.hidden_layers() != 2 || net.act_degrees()[0] != 1 || net.act_degrees()[1] != 1) {
    throw ShapeError("scale_equivalence_witness needs two hidden layers with linear activations");
  }
  if (c_with_c10.size() != 4) {
    throw ShapeError("scale_equivalence_witness expects (c10, c11, c20, c21)");
  }
  if (x.size() != net.input_dim()) throw ShapeError("input length does not match m_0");

  auto eval = [&](double c10, double c11, double c20, double c21) {
    Eigen::VectorXd h1 = (c11 * (net.weights()[0] * x)).array() + c10;
    Eigen::VectorXd h2 = (c21 * (net.weights()[1] * h1)).array() + c20;
    return Eigen::VectorXd(net.weights()[2] * h2);
  };
  const double c10 = c_with_c10[0], c11 = c_with_c10[1], c20 = c_with_c10[2], c21 = c_with_c10[3];
  return {eval(c10, c11, c20, c21), eval(tau * c10, tau * c11, c20, c21 / tau)};
}

}  // namespace polyact
