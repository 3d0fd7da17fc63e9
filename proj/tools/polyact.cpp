#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "polyact/experiments.hpp"
#include "polyact/hierarchy.hpp"
#include "polyact/io.hpp"
#include "polyact/momentsdp.hpp"
#include "polyact/popbuild.hpp"

namespace fs = std::filesystem;
using namespace polyact;

namespace {

enum Exit : int {
  kCertified = 0,
  kUncertified = 2,
  kSolverFailure = 3,
  kUsage = 64,
  kInput = 65,
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string network;
  std::string data;
  std::optional<int> k_max;
  double rank_tol = 1e-3;
  double cert_tol = 1e-6;
  std::optional<double> box;
  std::string out;
  std::string format = "text";
  std::uint64_t seed = 0;
  double noise = 1e-2;
};

std::string fixed(double v, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, std::abs(v) < 0.5 * std::pow(10.0, -prec) ? 0.0 : v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

std::string tuple(const Eigen::VectorXd& v) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fixed(v[i]);
  return s + ")";
}

HierarchyOptions hierarchy_options(const Common& o) {
  HierarchyOptions h;
  h.rank_tol = o.rank_tol;
  h.cert_tol = o.cert_tol;
  return h;
}

int outcome_exit(const HierarchyResult& r) {
  switch (r.outcome) {
    case Outcome::CertifiedGlobal:
      return kCertified;
    case Outcome::CandidateUncertified:
      return kUncertified;
    case Outcome::Exhausted:
      return kSolverFailure;
  }
  return kSolverFailure;
}

std::string flat_phrase(const OrderRecord& o) {
  if (!o.flat) return "no moments";
  return o.flat->holds ? "holds" : "flat truncation FAILS";
}

std::string report_text(const HierarchyResult& r, const PopInstance& pop) {
  std::ostringstream os;
  for (const auto& o : r.orders) {
    os << "k=" << o.k << ": theta_mom=" << sci(o.theta_mom) << " theta_sos=" << sci(o.theta_sos)
       << " status=" << to_string(o.status) << " iters=" << o.iterations;
    if (o.flat) {
      os << " flat=" << (o.flat->holds ? "yes" : "no") << " rank M_d=" << o.flat->rank
         << " rank M_{d-k0}=" << o.flat->rank_lower;
      if (o.flat->d) os << " d=" << *o.flat->d;
    }
    os << " time=" << fixed(o.assemble_seconds + o.solve_seconds + o.extract_seconds, 3) << "s\n";
  }
  os << "outcome: " << to_string(r.outcome);
  if (r.outcome == Outcome::CertifiedGlobal) os << " via " << to_string(r.route);
  os << "\n";
  if (r.z) {
    const auto c = *r.coefficients();
    for (Eigen::Index i = 0; i < c.size(); ++i) {
      os << "  " << pop.variable_names[static_cast<std::size_t>(i)] << " = " << fixed(c[i], 6) << "\n";
    }
    os << "  theta* = " << sci(r.theta) << "  lower bound = " << sci(r.lower_bound) << "  gap = " << sci(r.gap)
       << "\n";
  }
  if (r.failure_order) os << "solver NumericalFailure first at k=" << *r.failure_order << "\n";
  return os.str();
}

std::string summary_line(const HierarchyResult& r) {
  std::string s;
  for (const auto& o : r.orders) s += "k=" + std::to_string(o.k) + ": " + flat_phrase(o) + "; ";
  if (r.z) {
    s += "c* = " + tuple(*r.coefficients()) + ", theta* " + (std::abs(r.theta) < 1e-6 ? "~ 0" : "= " + sci(r.theta));
  } else {
    s += "no candidate";
  }
  return s;
}

std::string coefficients_json(const HierarchyResult& r, const PopInstance& pop) {
  nlohmann::ordered_json j;
  if (auto c = r.coefficients()) {
    j["c"] = std::vector<double>(c->data(), c->data() + c->size());
    std::vector<std::string> names(pop.variable_names.begin(), pop.variable_names.end() - 1);
    j["names"] = names;
    j["theta"] = r.theta;
  } else {
    j["c"] = nullptr;
  }
  j["outcome"] = to_string(r.outcome);
  return j.dump(2) + "\n";
}

void emit(const HierarchyResult& r, const PopInstance& pop, const Common& o) {
  if (o.format == "json") {
    std::cout << to_json(r, pop.variable_names) << "\n";
  } else if (o.format == "csv") {
    std::cout << "k,theta_mom,theta_sos,status,flat,rank,rank_lower\n";
    for (const auto& ord : r.orders) {
      std::cout << ord.k << ',' << sci(ord.theta_mom) << ',' << sci(ord.theta_sos) << ',' << to_string(ord.status)
                << ',' << (ord.flat && ord.flat->holds) << ',' << (ord.flat ? ord.flat->rank : 0) << ','
                << (ord.flat ? ord.flat->rank_lower : 0) << "\n";
    }
  } else {
    std::cout << report_text(r, pop);
  }
  if (!o.out.empty()) {
    write_text(fs::path(o.out) / "report.json", to_json(r, pop.variable_names) + "\n");
    write_text(fs::path(o.out) / "coefficients.json", coefficients_json(r, pop));
  }
}

int run_pipeline(const NetworkSpec& net, const TrainingSet& data, const Common& o, HierarchyResult& out,
                 PopInstance& pop) {
  data.validate_against(net);
  PopOptions popts;
  popts.box_radius = o.box;
  pop = build_pop(net, data, popts);
  const int k_max = o.k_max.value_or(pop.k0() + 2);
  if (k_max < pop.k0()) {
    throw UsageError("--k-max " + std::to_string(k_max) + " is below k0 = " + std::to_string(pop.k0()));
  }
  out = solve_hierarchy(pop, k_max, hierarchy_options(o));
  emit(out, pop, o);
  return outcome_exit(out);
}

int cmd_example(const Common& o) {
  HierarchyResult r;
  PopInstance pop;
  int code = run_pipeline(worked_example_network(), worked_example_data(), o, r, pop);
  if (o.format == "text") std::cout << summary_line(r) << "\n";
  if (code == kCertified) {
    const auto c = *r.coefficients();
    const double err = (c - worked_example_minimizer().values()).lpNorm<Eigen::Infinity>();
    if (err > 1e-5 || r.theta > 1e-6) {
      std::cerr << "certified point differs from the expected minimizer (max error " << sci(err) << ")\n";
      code = kSolverFailure;
    }
  }
  return code;
}

int cmd_solve(const Common& o) {
  const NetworkSpec net = read_network(o.network);
  const TrainingSet data = read_data(o.data);
  HierarchyResult r;
  PopInstance pop;
  return run_pipeline(net, data, o, r, pop);
}

int cmd_export(const Common& o, int k) {
  const NetworkSpec net = read_network(o.network);
  const TrainingSet data = read_data(o.data);
  data.validate_against(net);
  PopOptions popts;
  popts.box_radius = o.box;
  const PopInstance pop = build_pop(net, data, popts);
  if (k < pop.k0()) {
    throw UsageError("relaxation order k = " + std::to_string(k) + " is below k0 = " + std::to_string(pop.k0()));
  }
  const std::string text = export_sdpa(assemble_relaxation(pop, k));
  if (o.out.empty()) {
    std::cout << text;
  } else {
    write_text(o.out, text);
  }
  return 0;
}

std::vector<int> parse_ints(const std::string& s, const char* flag) {
  std::vector<int> v;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t pos = 0;
      v.push_back(std::stoi(tok, &pos));
      if (pos != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw UsageError(std::string(flag) + ": \"" + tok + "\" is not an integer");
    }
  }
  if (v.empty()) throw UsageError(std::string(flag) + " is empty");
  return v;
}

Family pick_family(const std::string& name) {
  if (name == "residual") return residual_family();
  const auto& fams = accuracy_families();
  if (name.size() == 1 && name[0] >= '1' && name[0] <= '4') return fams[static_cast<std::size_t>(name[0] - '1')];
  throw UsageError("--family must be 1, 2, 3, 4 or residual");
}

ExperimentConfig synth_config(const Common& o, const std::string& family, const std::string& dims,
                              const std::string& degrees, int width, std::size_t N, std::size_t N_test) {
  ExperimentConfig cfg;
  if (!dims.empty() || !degrees.empty()) {
    if (dims.empty() || degrees.empty()) throw UsageError("--dims and --act-degrees go together");
    cfg.dims = parse_ints(dims, "--dims");
    cfg.act_degrees = parse_ints(degrees, "--act-degrees");
    cfg.N = N;
    cfg.noise_scale = o.noise;
    cfg.seed = o.seed;
  } else {
    cfg = family_config(pick_family(family), width, N, o.noise, o.seed);
  }
  cfg.N_test = N_test;
  cfg.k_max = o.k_max;
  cfg.box_radius = o.box;
  cfg.hierarchy = hierarchy_options(o);
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

void write_residuals(const ResidualReport& t, const fs::path& dir) {
  write_text(dir / "residual_components.csv", t.components_csv());
  write_text(dir / "residual_norms.csv", t.norms_csv());
}

std::string residual_summary(const ResidualReport& t) {
  double worst = t.norm_trend.ratio();
  for (const auto& c : t.component_trends) worst = std::max(worst, c.ratio());
  return "MSE = " + sci(t.mse) + "  RMSE = " + sci(t.rmse) + "  norm slope = " + sci(t.norm_trend.slope) +
         " (stderr " + sci(t.norm_trend.stderr_) + ")  max |slope|/stderr = " + fixed(worst, 2) + "\n";
}

int cmd_synth(const Common& o, const ExperimentConfig& cfg) {
  const SyntheticInstance inst = make_instance(cfg);
  const ExperimentReport rep = run_training_experiment(cfg);
  if (!o.out.empty()) {
    const fs::path dir(o.out);
    write_text(dir / "network.json", network_to_json(inst.net));
    write_text(dir / "data.json", data_to_json(inst.train));
    write_text(dir / "provenance.json", provenance_to_json(*inst.train.provenance));
    if (inst.test) write_text(dir / "test.json", data_to_json(*inst.test));
    write_text(dir / "report.json", rep.to_json() + "\n");
    if (rep.c_pred) {
      nlohmann::ordered_json j;
      j["c"] = std::vector<double>(rep.c_pred->data(), rep.c_pred->data() + rep.c_pred->size());
      j["names"] = inst.net.coefficient_names();
      write_text(dir / "coefficients.json", j.dump(2) + "\n");
    }
    if (rep.test) write_residuals(*rep.test, dir);
  }
  if (o.format == "json") {
    std::cout << rep.to_json() << "\n";
  } else {
    std::cout << cfg.label() << "  AbsErr = " << sci(rep.abs_err) << "  RelErr = " << sci(rep.rel_err)
              << "  ||eps||_2 = " << sci(rep.noise_norm) << "  time = " << fixed(rep.times.total, 3) << "s\n";
    if (rep.hierarchy) std::cout << "outcome: " << to_string(rep.hierarchy->outcome) << "\n";
    if (rep.test) std::cout << residual_summary(*rep.test);
    if (!rep.ok) std::cout << "error: " << rep.error << "\n";
  }
  if (!rep.ok || !rep.hierarchy) return kSolverFailure;
  return outcome_exit(*rep.hierarchy);
}

int cmd_sweep(const Common& o, const std::string& family, const std::vector<int>& widths, std::size_t N,
              int seeds, int workers) {
  std::vector<ExperimentConfig> cfgs;
  for (int w : widths) {
    for (int s = 0; s < seeds; ++s) {
      Common os = o;
      os.seed = o.seed + static_cast<std::uint64_t>(s);
      cfgs.push_back(synth_config(os, family, "", "", w, N, 0));
    }
  }
  const SweepTable t = sweep(cfgs, workers);
  if (o.format == "csv") {
    std::cout << t.csv();
  } else if (o.format == "json") {
    std::cout << "[";
    for (std::size_t i = 0; i < t.rows.size(); ++i) std::cout << (i ? ",\n" : "\n") << t.rows[i].to_json(true, 1);
    std::cout << "\n]\n";
  } else {
    std::cout << t.text();
  }
  if (!o.out.empty()) {
    write_text(fs::path(o.out) / "sweep.csv", t.csv());
    write_text(fs::path(o.out) / "sweep.txt", t.text());
  }
  for (const auto& r : t.rows) {
    if (!r.ok) return kSolverFailure;
  }
  return 0;
}

int cmd_residuals(const Common& o, const std::string& test_path, const std::string& coeffs_path) {
  const NetworkSpec net = read_network(o.network);
  const TrainingSet test = read_data(test_path);
  const std::string text = read_text(coeffs_path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error&) {
    throw InputError(coeffs_path + ": malformed JSON");
  }
  if (!j.is_object() || !j.contains("c") || !j["c"].is_array()) {
    throw InputError(coeffs_path + ": missing field \"c\"");
  }
  std::vector<double> c;
  for (std::size_t i = 0; i < j["c"].size(); ++i) {
    if (!j["c"][i].is_number()) throw InputError(coeffs_path + ": field \"c[" + std::to_string(i) + "]\" is not a number");
    c.push_back(j["c"][i].get<double>());
  }
  if (c.size() != net.num_coefficients()) {
    throw InputError(coeffs_path + ": field \"c\" has " + std::to_string(c.size()) + " entries, network needs " +
                     std::to_string(net.num_coefficients()));
  }
  const ResidualReport rep =
      residual_analysis(net, CoefficientVector(Eigen::Map<Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size()))), test);
  if (o.format == "csv") {
    std::cout << rep.components_csv();
  } else {
    std::cout << residual_summary(rep);
  }
  if (!o.out.empty()) write_residuals(rep, o.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Train polynomial activation coefficients with the Moment-SOS hierarchy"};
  app.require_subcommand(1);
  Common o;

  auto hierarchy_flags = [&](CLI::App* c) {
    c->add_option("--k-max", o.k_max, "Highest relaxation order (default k0 + 2)")->check(CLI::PositiveNumber);
    c->add_option("--rank-tol", o.rank_tol, "Relative singular-value cutoff for numerical rank")
        ->check(CLI::Range(1e-16, 0.999))
        ->capture_default_str();
    c->add_option("--cert-tol", o.cert_tol, "Certification tolerance")->check(CLI::NonNegativeNumber)->capture_default_str();
    c->add_option("--box", o.box, "Add R^2 - z_i^2 >= 0 for every variable (not part of the plain problem)")
        ->check(CLI::PositiveNumber);
  };
  auto format_flag = [&](CLI::App* c) {
    c->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"text", "json", "csv"}))->capture_default_str();
  };

  auto* example = app.add_subcommand("example", "Run the built-in two-hidden-layer example");
  hierarchy_flags(example);
  format_flag(example);
  example->add_option("--out", o.out, "Directory for report.json and coefficients.json");

  auto* solve = app.add_subcommand("solve", "Train from a network file and a data file");
  solve->add_option("--network", o.network, "Network JSON")->required();
  solve->add_option("--data", o.data, "Training data (.json or .csv)")->required();
  hierarchy_flags(solve);
  format_flag(solve);
  solve->add_option("--out", o.out, "Directory for report.json and coefficients.json");

  std::string family = "1", dims, degrees;
  int width = 6;
  std::size_t N = 20, N_test = 0;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic instance, train on it and score the result");
  synth->add_option("--family", family, "1-4 for the accuracy families, or residual")->capture_default_str();
  synth->add_option("--width", width, "Uniform layer width for --family")->check(CLI::PositiveNumber)->capture_default_str();
  synth->add_option("--dims", dims, "Comma-separated widths m0,...,m_out (overrides --family)");
  synth->add_option("--act-degrees", degrees, "Comma-separated activation degrees");
  synth->add_option("--N", N, "Training samples")->check(CLI::PositiveNumber)->capture_default_str();
  synth->add_option("--N-test", N_test, "Held-out samples for residual analysis")->capture_default_str();
  synth->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  synth->add_option("--noise", o.noise, "Noise scale")->check(CLI::NonNegativeNumber)->capture_default_str();
  hierarchy_flags(synth);
  format_flag(synth);
  synth->add_option("--out", o.out, "Directory for network, data, provenance and report files");

  std::string widths_s = "4,5,6,7,8";
  int seeds = 1, workers = 1;
  std::size_t sweep_N = 20;
  auto* sw = app.add_subcommand("sweep", "Run a family over several widths and print the accuracy table");
  sw->add_option("--family", family, "1-4 or residual")->capture_default_str();
  sw->add_option("--widths", widths_s, "Comma-separated widths, one row each")->capture_default_str();
  sw->add_option("--N", sweep_N, "Training samples")->check(CLI::PositiveNumber)->capture_default_str();
  sw->add_option("--seeds", seeds, "Seeds per width")->check(CLI::PositiveNumber)->capture_default_str();
  sw->add_option("--workers", workers, "Rows solved in parallel")->check(CLI::PositiveNumber)->capture_default_str();
  sw->add_option("--seed", o.seed, "First seed")->capture_default_str();
  sw->add_option("--noise", o.noise, "Noise scale")->check(CLI::NonNegativeNumber)->capture_default_str();
  hierarchy_flags(sw);
  format_flag(sw);
  sw->add_option("--out", o.out, "Directory for sweep.csv and sweep.txt");

  int k = 0;
  auto* exp = app.add_subcommand("export-sdpa", "Write the order-k moment relaxation in SDPA sparse format");
  exp->add_option("--network", o.network, "Network JSON")->required();
  exp->add_option("--data", o.data, "Training data (.json or .csv)")->required();
  exp->add_option("--k", k, "Relaxation order")->required();
  exp->add_option("--box", o.box, "Add box constraints of radius R")->check(CLI::PositiveNumber);
  exp->add_option("--out", o.out, "Output .dat-s file (stdout when omitted)");

  std::string test_path, coeffs_path;
  auto* res = app.add_subcommand("residuals", "Residuals of learned coefficients on a test set");
  res->add_option("--network", o.network, "Network JSON")->required();
  res->add_option("--data", test_path, "Test data (.json or .csv)")->required();
  res->add_option("--coefficients", coeffs_path, "coefficients.json written by solve")->required();
  res->add_option("--out", o.out, "Directory for residual CSV files");
  res->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"text", "csv"}))->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (*example) return cmd_example(o);
    if (*solve) return cmd_solve(o);
    if (*synth) return cmd_synth(o, synth_config(o, family, dims, degrees, width, N, N_test));
    if (*sw) return cmd_sweep(o, family, parse_ints(widths_s, "--widths"), sweep_N, seeds, workers);
    if (*exp) return cmd_export(o, k);
    if (*res) return cmd_residuals(o, test_path, coeffs_path);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInput;
  } catch (const ShapeError& e) {
    std::cerr << "shape error: " << e.what() << "\n";
    return kInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSolverFailure;
  }
  return kUsage;
}
