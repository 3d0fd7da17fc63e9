#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "polyact/netmodel.hpp"

namespace polyact {

/// Malformed input file. The message names the file and, where known, the
/// line and field.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// {"dims": [...], "act_degrees": [...], "weights": [W_1, ..., W_{D+1}]} where
/// each W_l is either a list of rows or a flat row-major list.
NetworkSpec parse_network_json(const std::string& text, const std::string& source = "<network>");
NetworkSpec read_network(const std::filesystem::path& path);
std::string network_to_json(const NetworkSpec& net);

/// JSON {"samples": [{"x": [...], "y": [...]}, ...]}.
TrainingSet parse_data_json(const std::string& text, const std::string& source = "<data>");
/// Header x_1..x_{m0},y_1..y_{m_out}, one sample per line.
TrainingSet parse_data_csv(const std::string& text, const std::string& source = "<data>");
/// Picks the parser from the extension (.json or .csv).
TrainingSet read_data(const std::filesystem::path& path);
std::string data_to_json(const TrainingSet& data);
std::string data_to_csv(const TrainingSet& data);

/// c_true, seed, noise_scale, noise policy and per-sample noise norms.
std::string provenance_to_json(const Provenance& p);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace polyact
