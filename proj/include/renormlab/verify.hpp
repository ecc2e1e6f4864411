#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "renormlab/cascade.hpp"

namespace renormlab {

/// Raised for malformed or out-of-range configuration; maps to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct SampleCounts {
  std::size_t psi = 10000;
  std::size_t seed_norm = 10000;
  std::size_t lemmas = 10000;
  std::size_t approximation = 1000;
  std::size_t combine = 1000;
  std::size_t lfc = 1000;
  std::size_t cascade = 10000;
  std::size_t coincidence = 200;
  std::size_t slice = 200;
  std::size_t biortho = 200;
};

struct FigureConfig {
  std::array<double, 4> box{-2.0, 2.0, -2.0, 2.0};  // y1 min, y1 max, y2 min, y2 max
  std::size_t grid = 101;
  std::size_t section_dim = 2;
};

struct RunConfig {
  int format_version = 1;
  double delta = 0.4;
  EtaSchedule eta{0.02, 0.5};
  Backend backend = Backend::RescaleExact;
  std::size_t stage_budget = 128;
  std::uint64_t seed = 42;
  std::vector<double> psi_deltas{0.1, 0.25, 0.4};
  std::vector<double> taus{1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
  std::vector<double> dentability_targets{0.5, 0.1, 0.01};
  double biortho_eps = 0.1;
  std::size_t biortho_k = 5;
  SampleCounts samples;
  FigureConfig figure;
  std::string output_dir = "renormlab-out";
};

/// Parses and validates a configuration object. Unknown fields, wrong
/// types and every cascade constraint are rejected with ConfigError.
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);
nlohmann::json to_json(const RunConfig& cfg);
/// Applies RENORMLAB_SEED when set (ConfigError if it is not an integer).
void apply_seed_override(RunConfig& cfg);

CascadeConfig cascade_config_for(const RunConfig& cfg);

struct VerifyOutcome {
  bool pass = false;
  nlohmann::json bundle;
  std::optional<std::string> first_failure;  // path of the first failing check
  std::vector<std::pair<std::string, std::string>> tables;  // file name, CSV text
};

/// Runs the nine sections in order: psi, seed_norm, lemmas, approximation,
/// combine, cascade, witness, dentability, biortho.
VerifyOutcome run_verify_all(const RunConfig& cfg);

/// Writes bundle.json and the CSV tables into cfg.output_dir.
void write_outcome(const VerifyOutcome& out, const std::string& dir);

/// Grid of (y1, y2, psi, seed_norm, cone_side) rows for x0 = f0 = e_1 on the
/// section y1 e_1 + y2 e_2; ParameterError unless section_dim == 2.
std::string emit_figure_data(const RunConfig& cfg);

}  // namespace renormlab
