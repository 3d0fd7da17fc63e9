#include "polyact/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace polyact {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

LinearTrend fit_trend(const std::vector<double>& y) {
  LinearTrend t;
  const std::size_t n = y.size();
  if (n < 3) return t;
  double xm = 0.0, ym = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    xm += static_cast<double>(i + 1);
    ym += y[i];
  }
  xm /= static_cast<double>(n);
  ym /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = static_cast<double>(i + 1) - xm;
    sxx += dx * dx;
    sxy += dx * (y[i] - ym);
  }
  t.slope = sxy / sxx;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - ym - t.slope * (static_cast<double>(i + 1) - xm);
    sse += e * e;
  }
  t.stderr_ = std::sqrt(sse / static_cast<double>(n - 2) / sxx);
  return t;
}

std::string fmt(double v, const char* spec = "%.4g") {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace

const std::vector<Family>& accuracy_families() {
  static const std::vector<Family> f = {
      {"2-layer quadratic", {2, 2}},
      {"2-layer quadratic+cubic", {2, 3}},
      {"3-layer linear", {1, 1, 1}},
      {"3-layer quadratic+linear", {2, 1, 1}},
  };
  return f;
}

Family residual_family() { return {"2-layer cubic+quadratic", {3, 2}}; }

NetworkSpec worked_example_network() {
  Eigen::MatrixXd W1(4, 4), W2(4, 4), W3(4, 4);
  W1 << 1, 0, -1, 1, 0, 1, 1, 1, -1, 0, 1, -1, -2, 1, -1, 0;
  W2 << 1, -1, 0, 2, 2, 1, 1, 0, 1, 1, 1, 2, 0, 1, 1, 1;
  W3 << 1, 1, 0, 1, -2, -1, 1, 1, 1, 0, 1, 1, -1, 0, -2, 1;
  return NetworkSpec({4, 4, 4, 4}, {2, 1}, {W1, W2, W3});
}

TrainingSet worked_example_data() {
  Eigen::VectorXd x1(4), y1(4), x2(4), y2(4);
  x1 << 2, 1, 0, -1;
  y1 << 66, -22, 106, -104;
  x2 << -1, 1, 1, 1;
  y2 << 38, 30, 46, -33;
  TrainingSet d;
  d.samples = {{x1, y1}, {x2, y2}};
  return d;
}

CoefficientVector worked_example_minimizer() { return CoefficientVector{1.0, -2.0, 1.0, -1.0}; }

void ExperimentConfig::validate() const {
  if (dims.size() < 3) throw std::invalid_argument("experiment: need at least one hidden layer");
  if (act_degrees.size() + 2 != dims.size()) {
    throw std::invalid_argument("experiment: dims must have one more entry than act_degrees plus one");
  }
  if (std::any_of(dims.begin(), dims.end(), [](int m) { return m < 1; })) {
    throw std::invalid_argument("experiment: widths must be positive");
  }
  if (N < 1) throw std::invalid_argument("experiment: N must be positive");
  if (!(noise_scale >= 0.0)) throw std::invalid_argument("experiment: noise_scale must be nonnegative");
  hierarchy.validate();
}

std::string ExperimentConfig::label() const {
  std::string s = "(" + std::to_string(N);
  for (int m : dims) s += ", " + std::to_string(m);
  return s + ")";
}

ExperimentConfig family_config(const Family& f, int width, std::size_t N, double noise, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.act_degrees = f.act_degrees;
  cfg.dims.assign(f.act_degrees.size() + 2, width);
  cfg.N = N;
  cfg.noise_scale = noise;
  cfg.seed = seed;
  return cfg;
}

SyntheticInstance make_instance(const ExperimentConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  NetworkSpec net = random_network(cfg.dims, cfg.act_degrees, rng, cfg.weight_init);
  CoefficientVector c_true = random_coefficients(net, rng);
  const std::uint64_t data_seed = rng();
  const std::uint64_t test_seed = rng();
  TrainingSet train = generate_synthetic(net, cfg.N, cfg.noise_scale, data_seed, c_true, cfg.noise_policy);
  std::optional<TrainingSet> test;
  if (cfg.N_test > 0) test = generate_synthetic(net, cfg.N_test, 0.0, test_seed, c_true, cfg.noise_policy);
  return {std::move(net), std::move(c_true), std::move(train), std::move(test)};
}

double LinearTrend::ratio() const {
  if (stderr_ > 0.0) return std::abs(slope) / stderr_;
  return slope == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

std::string ResidualReport::components_csv() const {
  std::ostringstream os;
  os << "i,j,eps\n";
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    for (Eigen::Index j = 0; j < residuals[i].size(); ++j) {
      os << i + 1 << ',' << j + 1 << ',' << fmt(residuals[i][j], "%.17g") << '\n';
    }
  }
  return os.str();
}

std::string ResidualReport::norms_csv() const {
  std::ostringstream os;
  os << "i,norm\n";
  for (std::size_t i = 0; i < residuals.size(); ++i) os << i + 1 << ',' << fmt(residuals[i].norm(), "%.17g") << '\n';
  return os.str();
}

ResidualReport residual_analysis(const NetworkSpec& net, const CoefficientVector& c_pred, const TrainingSet& test) {
  test.validate_against(net);
  ResidualReport rep;
  if (test.size() == 0) return rep;
  std::vector<double> norms;
  std::vector<std::vector<double>> comps(static_cast<std::size_t>(net.output_dim()));
  double sq = 0.0;
  for (const auto& s : test.samples) {
    Eigen::VectorXd e = numeric_forward(net, c_pred, s.x) - s.y;
    sq += e.squaredNorm();
    norms.push_back(e.norm());
    for (Eigen::Index j = 0; j < e.size(); ++j) comps[static_cast<std::size_t>(j)].push_back(e[j]);
    rep.residuals.push_back(std::move(e));
  }
  rep.mse = sq / static_cast<double>(test.size());
  rep.rmse = std::sqrt(rep.mse);
  rep.norm_trend = fit_trend(norms);
  for (const auto& c : comps) rep.component_trends.push_back(fit_trend(c));
  return rep;
}

ExperimentReport run_training_experiment(const ExperimentConfig& cfg) {
  ExperimentReport rep;
  rep.config = cfg;
  const auto t_start = Clock::now();
  try {
    auto t0 = Clock::now();
    const SyntheticInstance inst = make_instance(cfg);
    const NetworkSpec& net = inst.net;
    const TrainingSet& data = inst.train;
    rep.times.generate = seconds_since(t0);
    rep.c_true = inst.c_true.values();

    Eigen::VectorXd mean_eps = Eigen::VectorXd::Zero(net.output_dim());
    double norm_sum = 0.0;
    for (const auto& e : data.provenance->noise) {
      mean_eps += e;
      norm_sum += e.norm();
    }
    rep.noise_norm = (mean_eps / static_cast<double>(cfg.N)).norm();
    rep.mean_sample_noise_norm = norm_sum / static_cast<double>(cfg.N);

    t0 = Clock::now();
    PopOptions popts;
    popts.box_radius = cfg.box_radius;
    const PopInstance pop = build_pop(net, data, popts);
    rep.times.symbolic = seconds_since(t0);

    const int k_max = cfg.k_max.value_or(pop.k0() + 1);
    HierarchyResult h = solve_hierarchy(pop, k_max, cfg.hierarchy);
    for (const auto& o : h.orders) {
      rep.times.assemble += o.assemble_seconds;
      rep.times.solve += o.solve_seconds;
      rep.times.extract += o.extract_seconds;
    }
    if (auto c = h.coefficients()) {
      rep.c_pred = *c;
      rep.abs_err = (*c - rep.c_true).norm();
      rep.rel_err = rep.noise_norm > 0.0 ? rep.abs_err / rep.noise_norm : kNaN;
      if (inst.test) rep.test = residual_analysis(net, CoefficientVector(*c), *inst.test);
    } else {
      rep.abs_err = kNaN;
      rep.rel_err = kNaN;
    }
    rep.hierarchy = std::move(h);
    rep.ok = true;
  } catch (const std::exception& e) {
    rep.ok = false;
    rep.error = e.what();
    rep.abs_err = kNaN;
    rep.rel_err = kNaN;
  }
  rep.times.total = seconds_since(t_start);
  return rep;
}

std::string ExperimentReport::to_json(bool include_timing, int indent) const {
  using nlohmann::ordered_json;
  auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  auto num = [](double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); };

  ordered_json j;
  j["dims"] = config.dims;
  j["act_degrees"] = config.act_degrees;
  j["N"] = config.N;
  j["N_test"] = config.N_test;
  j["noise_scale"] = config.noise_scale;
  j["seed"] = config.seed;
  j["ok"] = ok;
  if (!ok) j["error"] = error;
  j["c_true"] = vec(c_true);
  j["c_pred"] = c_pred ? ordered_json(vec(*c_pred)) : ordered_json(nullptr);
  j["abs_err"] = num(abs_err);
  j["rel_err"] = num(rel_err);
  j["noise_norm"] = noise_norm;
  j["mean_sample_noise_norm"] = mean_sample_noise_norm;
  if (hierarchy) {
    j["outcome"] = polyact::to_string(hierarchy->outcome);
    j["theta"] = hierarchy->theta;
    j["lower_bound"] = hierarchy->lower_bound;
    ordered_json orders = ordered_json::array();
    for (const auto& o : hierarchy->orders) {
      orders.push_back({{"k", o.k},
                        {"theta_mom", o.theta_mom},
                        {"theta_sos", o.theta_sos},
                        {"status", polyact::to_string(o.status)},
                        {"flat", o.flat && o.flat->holds},
                        {"certified", o.certified}});
    }
    j["orders"] = orders;
  }
  if (test) {
    j["test"] = {{"mse", test->mse},
                 {"rmse", test->rmse},
                 {"norm_slope", test->norm_trend.slope},
                 {"norm_slope_stderr", test->norm_trend.stderr_}};
  }
  if (include_timing) {
    j["seconds"] = {{"generate", times.generate}, {"symbolic", times.symbolic}, {"assemble", times.assemble},
                    {"solve", times.solve},       {"extract", times.extract},   {"total", times.total}};
  }
  return j.dump(indent);
}

std::string SweepTable::text() const {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-28s %10s %10s %9s %10s\n", "dims", "AbsErr", "RelErr", "Time", "||eps||_2");
  os << line;
  std::vector<std::string> failures;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    std::snprintf(line, sizeof line, "%-28s %10s %10s %9s %10s\n", r.config.label().c_str(), fmt(r.abs_err).c_str(),
                  fmt(r.rel_err).c_str(), fmt(r.times.total, "%.3f").c_str(), fmt(r.noise_norm).c_str());
    os << line;
    if (!r.ok) failures.push_back("row " + std::to_string(i + 1) + ": " + r.error);
  }
  for (const auto& f : failures) os << f << '\n';
  return os.str();
}

std::string SweepTable::csv() const {
  std::ostringstream os;
  os << "dims,AbsErr,RelErr,Time,noise_norm\n";
  for (const auto& r : rows) {
    os << '"' << r.config.label() << "\"," << fmt(r.abs_err, "%.10g") << ',' << fmt(r.rel_err, "%.10g") << ','
       << fmt(r.times.total, "%.6f") << ',' << fmt(r.noise_norm, "%.10g") << '\n';
  }
  return os.str();
}

SweepTable sweep(const std::vector<ExperimentConfig>& cfgs, int workers) {
  if (cfgs.empty()) throw std::invalid_argument("sweep: no configurations");
  SweepTable table;
  table.rows.resize(cfgs.size());
  const auto nw = static_cast<std::size_t>(std::clamp(workers, 1, static_cast<int>(cfgs.size())));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < cfgs.size(); i = next++) table.rows[i] = run_training_experiment(cfgs[i]);
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < nw; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  return table;
}

}  // namespace polyact
