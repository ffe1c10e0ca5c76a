#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "holograph/network.hpp"
#include "holograph/training.hpp"

namespace holograph {

// Everything a run needs, with the stock defaults baked in. Parsed from a
// JSON file; unknown keys are an error so typos cannot silently fall back.
struct RunConfig {
  std::string dataset;
  std::string out_dir = "out";
  std::uint64_t seed = 1;

  // grid
  std::uint32_t n = 200;
  double pitch = 36e-6;
  double wavelength = 532e-9;
  double layer_distance = 0.2794;
  bool pad_propagation = false;

  // input
  std::uint32_t d = 100;
  std::uint32_t k = 5;
  double alpha = 0.15;
  double epsilon = 1e-4;
  bool encode_score_on_phase = false;
  bool normalize_per_node = false;

  // network
  std::uint32_t num_layers = 6;
  std::uint32_t feature_layers = 3;
  std::string skip_setup = "2";  // "none", "1".."6", or "explicit"
  std::optional<std::vector<SkipChannel>> explicit_skips;
  std::uint32_t detector_side = 20;

  // training
  Hyperparams hyper;
  std::uint32_t test_size = 1000;
  bool normalize_detector_sums = false;
};

RunConfig parse_run_config_text(const std::string& text, const std::string& origin);
RunConfig parse_run_config(const std::filesystem::path& file);

// Full dump with every key materialized; parse(dump(c)) == c.
std::string dump_run_config(const RunConfig& cfg);

std::vector<SkipChannel> resolve_skips(const RunConfig& cfg);

// Assembles and validates the optical stack for a given class count.
NetworkConfig to_network_config(const RunConfig& cfg, std::uint32_t num_classes);

}  // namespace holograph
