#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "holograph/graphprep.hpp"
#include "holograph/run_config.hpp"
#include "holograph/training.hpp"

namespace holograph {

// Preprocessed per-node samples plus the artifacts needed to reproduce them.
// One file ("HGS1") per prep run; training/eval/sweeps all read this instead
// of re-running PCA/PPR.
struct SampleStore {
  std::uint32_t num_nodes = 0;
  std::uint32_t num_classes = 0;
  std::uint32_t k = 0;
  std::uint32_t d = 0;
  std::vector<std::uint32_t> labels;   // num_nodes
  PcaModel pca;
  std::vector<double> rows;    // num_nodes * k * d normalized amplitudes
  std::vector<double> scores;  // num_nodes * k descending ppr scores
  Split ids;

  NodeSample sample(std::uint32_t node) const;
};

SampleStore build_sample_store(const RunConfig& cfg);
void save_sample_store(const SampleStore& store, const std::filesystem::path& path);
SampleStore load_sample_store(const std::filesystem::path& path);

std::filesystem::path store_path(const RunConfig& cfg);
std::filesystem::path checkpoint_path(const RunConfig& cfg);

// FitDataset view over a store (encode captures store and cfg by reference;
// both must outlive the dataset).
FitDataset dataset_from_store(const SampleStore& store, const RunConfig& cfg);

struct PrepOutcome {
  std::filesystem::path store;
  std::uint32_t num_nodes = 0;
  std::uint32_t num_classes = 0;
  std::uint32_t train_count = 0;
  std::uint32_t test_count = 0;
};

// Dataset -> sample store on disk. Byte-identical per (config, seed).
PrepOutcome cmd_prep(const RunConfig& cfg);

struct RunControls {
  bool deterministic = false;
  std::uint32_t threads = 0;  // 0 = hardware concurrency
  std::function<void(const EpochMetrics&)> progress;
};

struct TrainOutcome {
  std::filesystem::path checkpoint;
  std::filesystem::path metrics_csv;
  EpochMetrics final_metrics;
  std::vector<EpochMetrics> history;
};

// Trains from the sample store (prepping it first if absent), writes the
// checkpoint, metrics.csv and run_meta.json into the output directory.
TrainOutcome cmd_train(const RunConfig& cfg, const RunControls& controls = {});

struct EvalOutcome {
  double accuracy = 0.0;
  std::vector<std::vector<std::uint64_t>> confusion;  // [true][predicted]
  std::filesystem::path confusion_csv;
};

// Evaluates a checkpoint on the store's test split; errors on an empty one.
EvalOutcome cmd_eval(const RunConfig& cfg, const std::filesystem::path& checkpoint,
                     const RunControls& controls = {});

struct SweepOutcome {
  std::filesystem::path csv;
  std::vector<std::string> variants;              // column names
  std::vector<std::vector<double>> test_acc;      // per variant, per epoch
  std::vector<double> best_acc;                   // per variant
};

// Trains once per requested skip setup ("none", "1".."6") off a shared
// sample store and writes epoch,<setup...> accuracy trajectories.
SweepOutcome cmd_explore(const RunConfig& cfg, const std::vector<std::string>& setups,
                         const RunControls& controls = {});

// Sweeps one input-encoding axis: "k" (3,5,10,20,50,100), "d"
// (40,60,80,100,120,140) or "score" (flag off/on).
SweepOutcome cmd_ablate(const RunConfig& cfg, const std::string& axis,
                        const RunControls& controls = {});

// Stock small-topology gradient check; writes gradcheck.json.
GradCheckReport cmd_gradcheck(const RunConfig& cfg);

// Synthetic two-clique dataset in dataset directory format.
void cmd_synth(const std::filesystem::path& out_dir, std::uint64_t seed);

}  // namespace holograph
