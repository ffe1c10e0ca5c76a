#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "holograph/field_engine.hpp"

namespace holograph {

// Optical skip channel: taps the field right after layer `from`'s modulation
// (the encoded input when from = 0), flies (to - from) * z in free space, and
// merges into the input of layer `to`'s propagate-modulate step.
struct SkipChannel {
  std::uint32_t from = 0;
  std::uint32_t to = 0;
};

struct NetworkConfig {
  GridSpec grid;
  double layer_distance = 0.01;
  std::uint32_t num_layers = 6;
  // Split between "feature" and "prediction" layers; descriptive only, no
  // effect on the forward pass.
  std::uint32_t feature_layers = 3;
  std::vector<PhaseMask> masks;   // one per layer, each grid.n x grid.n
  std::vector<SkipChannel> skips;
  DetectorLayout detector;
  bool pad_propagation = false;
};

// Throws std::invalid_argument describing the first violated constraint.
void validate(const NetworkConfig& config);

// The named skip layouts studied in the source experiments, plus "none" and
// explicit lists ("0-4,0-5" or "0->4,0->5"). Numeric ids accept "3" and
// "setup3".
std::vector<SkipChannel> build_setup(const std::string& id);

struct ForwardResult {
  std::vector<double> intensity_map;    // |field|^2 at the detector plane
  std::vector<ComplexField> stations;   // [0] = input, [j] = post-modulation field of layer j
};

// Precomputed per-topology state for the hot path: propagation kernels keyed
// by hop count, and the e^{i theta} factors of the current masks. Kernels
// depend only on the topology; call set_masks after every parameter update.
struct NetworkPlan {
  GridSpec grid;
  double layer_distance = 0.0;
  std::uint32_t num_layers = 0;
  bool pad = false;
  std::vector<SkipChannel> skips;
  std::vector<std::uint32_t> kernel_hops;          // sorted distinct hop counts (includes 1)
  std::vector<std::vector<cdouble>> kernels;        // transfer per entry of kernel_hops
  std::vector<std::vector<cdouble>> mask_factors;   // e^{i theta} per layer

  void set_masks(const std::vector<PhaseMask>& masks);
};

NetworkPlan make_plan(const NetworkConfig& config);

// Propagate by hops * layer_distance using the plan's cached kernel; adjoint
// applies the conjugated kernel (used by reverse-mode gradients).
ComplexField plan_propagate(const NetworkPlan& plan, const ComplexField& f, std::uint32_t hops,
                            bool adjoint = false);

// Equal-weight complex mean, first element the mainline. Computed as
// f0 + sum(fi - f0)/k so merging identical fields is exact and
// merge(f, 0) = f/2 exactly.
ComplexField merge_fields(const std::vector<const ComplexField*>& fields);

ForwardResult forward_with_plan(const NetworkPlan& plan, const ComplexField& input);

// Convenience wrapper: builds a throwaway plan. Training uses the plan path.
ForwardResult forward(const NetworkConfig& config, const ComplexField& input);

// argmax of the detector sums; ties go to the lowest class index.
std::uint32_t predict(const NetworkConfig& config, const ComplexField& input);

// Adam moment buffers, shaped like the masks. Lives here because checkpoints
// carry them alongside the topology.
struct OptimizerMoments {
  std::vector<std::vector<double>> m, v;
};

// Binary checkpoint: magic "HGR1", version, topology, masks, optional
// optimizer moments. Bit-exact roundtrip of every f64.
void save_checkpoint(const NetworkConfig& config, const OptimizerMoments* moments,
                     const std::filesystem::path& path);

struct LoadedCheckpoint {
  NetworkConfig config;
  std::optional<OptimizerMoments> moments;
};

// Throws FormatError (with byte offset and section) on malformed input.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace holograph
