#include "polyact/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace polyact {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& source, const std::string& what) {
  throw InputError(source + ": " + what);
}

json parse_json(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < text.size() && i + 1 < e.byte; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    fail(source, "line " + std::to_string(line) + ", column " + std::to_string(col) + ": malformed JSON");
  }
}

const json& field(const json& obj, const char* name, const std::string& source, const std::string& where) {
  if (!obj.is_object()) fail(source, where + " must be an object");
  auto it = obj.find(name);
  if (it == obj.end()) fail(source, "missing field \"" + where + (where.empty() ? "" : ".") + name + "\"");
  return *it;
}

std::vector<double> numbers(const json& arr, const std::string& source, const std::string& name) {
  if (!arr.is_array()) fail(source, "field \"" + name + "\" must be an array of numbers");
  std::vector<double> v;
  v.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) fail(source, "field \"" + name + "[" + std::to_string(i) + "]\" is not a number");
    v.push_back(arr[i].get<double>());
  }
  return v;
}

std::vector<int> integers(const json& arr, const std::string& source, const std::string& name) {
  if (!arr.is_array()) fail(source, "field \"" + name + "\" must be an array of integers");
  std::vector<int> v;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number_integer()) fail(source, "field \"" + name + "[" + std::to_string(i) + "]\" is not an integer");
    v.push_back(arr[i].get<int>());
  }
  return v;
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string extension(const std::filesystem::path& p) {
  std::string e = p.extension().string();
  for (auto& ch : e) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return e;
}

std::vector<double> vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

NetworkSpec parse_network_json(const std::string& text, const std::string& source) {
  const json j = parse_json(text, source);
  if (!j.is_object()) fail(source, "top level must be an object");
  std::vector<int> dims = integers(field(j, "dims", source, ""), source, "dims");
  std::vector<int> degs = integers(field(j, "act_degrees", source, ""), source, "act_degrees");
  const json& ws = field(j, "weights", source, "");
  if (!ws.is_array()) fail(source, "field \"weights\" must be an array of matrices");
  if (dims.size() < 2) fail(source, "field \"dims\" needs at least two widths");
  if (ws.size() + 1 != dims.size()) {
    fail(source, "field \"weights\" has " + std::to_string(ws.size()) + " matrices, dims implies " +
                     std::to_string(dims.size() - 1));
  }
  std::vector<Eigen::MatrixXd> weights;
  for (std::size_t l = 0; l < ws.size(); ++l) {
    const std::string name = "weights[" + std::to_string(l) + "]";
    const int rows = dims[l + 1], cols = dims[l];
    if (rows < 1 || cols < 1) fail(source, "field \"dims\" has a nonpositive width");
    const json& w = ws[l];
    if (!w.is_array()) fail(source, "field \"" + name + "\" must be an array");
    Eigen::MatrixXd m(rows, cols);
    if (!w.empty() && w[0].is_array()) {
      if (w.size() != static_cast<std::size_t>(rows)) {
        fail(source, "field \"" + name + "\" has " + std::to_string(w.size()) + " rows, expected m_" +
                         std::to_string(l + 1) + " = " + std::to_string(rows));
      }
      for (int r = 0; r < rows; ++r) {
        const auto row = numbers(w[static_cast<std::size_t>(r)], source, name + "[" + std::to_string(r) + "]");
        if (row.size() != static_cast<std::size_t>(cols)) {
          fail(source, "field \"" + name + "[" + std::to_string(r) + "]\" has " + std::to_string(row.size()) +
                           " entries, expected m_" + std::to_string(l) + " = " + std::to_string(cols));
        }
        for (int c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)];
      }
    } else {
      const auto flat = numbers(w, source, name);
      if (flat.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
        fail(source, "field \"" + name + "\" has " + std::to_string(flat.size()) + " entries, expected " +
                         std::to_string(rows) + "x" + std::to_string(cols));
      }
      for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) m(r, c) = flat[static_cast<std::size_t>(r * cols + c)];
      }
    }
    weights.push_back(std::move(m));
  }
  try {
    return NetworkSpec(std::move(dims), std::move(degs), std::move(weights));
  } catch (const ShapeError& e) {
    fail(source, e.what());
  }
}

NetworkSpec read_network(const std::filesystem::path& path) {
  return parse_network_json(read_text(path), path.string());
}

std::string network_to_json(const NetworkSpec& net) {
  ordered_json j;
  j["dims"] = net.dims();
  j["act_degrees"] = net.act_degrees();
  ordered_json ws = ordered_json::array();
  for (const auto& w : net.weights()) {
    ordered_json m = ordered_json::array();
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      std::vector<double> row(static_cast<std::size_t>(w.cols()));
      for (Eigen::Index c = 0; c < w.cols(); ++c) row[static_cast<std::size_t>(c)] = w(r, c);
      m.push_back(row);
    }
    ws.push_back(m);
  }
  j["weights"] = ws;
  return j.dump(2) + "\n";
}

TrainingSet parse_data_json(const std::string& text, const std::string& source) {
  const json j = parse_json(text, source);
  const json& samples = field(j, "samples", source, "");
  if (!samples.is_array()) fail(source, "field \"samples\" must be an array");
  TrainingSet d;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const std::string where = "samples[" + std::to_string(i) + "]";
    const auto x = numbers(field(samples[i], "x", source, where), source, where + ".x");
    const auto y = numbers(field(samples[i], "y", source, where), source, where + ".y");
    d.samples.push_back({to_vector(x), to_vector(y)});
  }
  return d;
}

TrainingSet parse_data_csv(const std::string& text, const std::string& source) {
  std::istringstream is(text);
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (std::getline(is, line)) {
    ++lineno;
    if (!trim(line).empty()) {
      header = split(line);
      break;
    }
  }
  if (header.empty()) fail(source, "empty file");
  std::size_t nx = 0, ny = 0;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string& h = header[c];
    const std::string want_x = "x_" + std::to_string(nx + 1), want_y = "y_" + std::to_string(ny + 1);
    if (ny == 0 && h == want_x) {
      ++nx;
    } else if (nx > 0 && h == want_y) {
      ++ny;
    } else {
      fail(source, "line " + std::to_string(lineno) + ", column " + std::to_string(c + 1) + ": header \"" + h +
                       "\" where " + (ny == 0 ? want_x + " or " : std::string()) + want_y + " was expected");
    }
  }
  if (nx == 0 || ny == 0) fail(source, "line " + std::to_string(lineno) + ": header needs x_1.. and y_1.. columns");

  TrainingSet d;
  while (std::getline(is, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (cells.size() != nx + ny) {
      fail(source, "line " + std::to_string(lineno) + ": " + std::to_string(cells.size()) + " fields, expected " +
                       std::to_string(nx + ny));
    }
    Eigen::VectorXd x(static_cast<Eigen::Index>(nx)), y(static_cast<Eigen::Index>(ny));
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v = 0.0;
      const auto& s = cells[c];
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
        fail(source, "line " + std::to_string(lineno) + ", field " + header[c] + ": \"" + s + "\" is not a number");
      }
      if (c < nx) {
        x[static_cast<Eigen::Index>(c)] = v;
      } else {
        y[static_cast<Eigen::Index>(c - nx)] = v;
      }
    }
    d.samples.push_back({std::move(x), std::move(y)});
  }
  return d;
}

TrainingSet read_data(const std::filesystem::path& path) {
  const std::string ext = extension(path);
  if (ext == ".json") return parse_data_json(read_text(path), path.string());
  if (ext == ".csv") return parse_data_csv(read_text(path), path.string());
  throw InputError(path.string() + ": unknown data format \"" + ext + "\" (use .json or .csv)");
}

std::string data_to_json(const TrainingSet& data) {
  ordered_json samples = ordered_json::array();
  for (const auto& s : data.samples) samples.push_back({{"x", vec(s.x)}, {"y", vec(s.y)}});
  ordered_json j;
  j["samples"] = samples;
  return j.dump(1) + "\n";
}

std::string data_to_csv(const TrainingSet& data) {
  std::ostringstream os;
  if (data.samples.empty()) return "";
  const auto nx = data.samples.front().x.size(), ny = data.samples.front().y.size();
  for (Eigen::Index i = 0; i < nx; ++i) os << (i ? "," : "") << "x_" << i + 1;
  for (Eigen::Index i = 0; i < ny; ++i) os << ",y_" << i + 1;
  os << '\n';
  char buf[64];
  for (const auto& s : data.samples) {
    for (Eigen::Index i = 0; i < s.x.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", s.x[i]);
      os << (i ? "," : "") << buf;
    }
    for (Eigen::Index i = 0; i < s.y.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", s.y[i]);
      os << ',' << buf;
    }
    os << '\n';
  }
  return os.str();
}

std::string provenance_to_json(const Provenance& p) {
  ordered_json j;
  j["c_true"] = vec(p.c_true.values());
  j["seed"] = p.seed;
  j["noise_scale"] = p.noise_scale;
  j["noise_policy"] = p.policy == NoisePolicy::PerSample ? "per-sample" : "shared";
  std::vector<double> norms;
  for (const auto& e : p.noise) norms.push_back(e.norm());
  j["noise_norms"] = norms;
  return j.dump(2) + "\n";
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path.string() + ": cannot open file");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path.string() + ": cannot write file");
  out << text;
}

}  // namespace polyact
