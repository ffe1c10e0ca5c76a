#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "holograph/network.hpp"

namespace holograph {

struct Hyperparams {
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_adam = 1e-8;
  std::uint32_t epochs = 500;
  std::uint32_t batch_size = 32;
};

struct TrainState {
  std::vector<PhaseMask> masks;
  OptimizerMoments moments;   // zero-initialized to mask shapes
  std::uint64_t step_count = 0;  // Adam's t (bias correction)
  std::uint32_t epoch = 0;
  std::uint64_t rng_seed = 0;
  Hyperparams hyper;
};

// Fresh state with i.i.d. U[0, 2*pi) masks from the seed's "init" stream and
// zeroed moments.
TrainState init_state(const GridSpec& grid, std::uint32_t num_layers, std::uint64_t seed,
                      const Hyperparams& hyper);

struct LossReport {
  double loss = 0.0;
  std::vector<double> softmax_probs;
  std::uint32_t predicted = 0;
};

// Mean squared error between softmax(detector sums) and the one-hot target:
// l = (1/C) * sum_c (p_c - [c == target])^2.
LossReport loss(const std::vector<double>& detector_sums, std::uint32_t target);

// dl/d(detector sums), evaluated from the softmax probabilities.
std::vector<double> loss_grad(const std::vector<double>& softmax_probs, std::uint32_t target);

struct GradientResult {
  std::vector<std::vector<double>> grads;  // per layer, grid.n^2 each
  LossReport report;
};

// Reverse-mode dl/dtheta through detector, intensity, modulations, merges and
// propagations. Needs the stations recorded by forward_with_plan.
GradientResult backward_with_plan(const NetworkPlan& plan, const DetectorLayout& detector,
                                  bool normalize_detector, const ForwardResult& fwd,
                                  std::uint32_t target);

// Convenience wrapper: forward + backward from a config.
GradientResult backward(const NetworkConfig& config, const ComplexField& input,
                        std::uint32_t target, bool normalize_detector = false);

// Adam with bias correction; step_count increments once per call.
void step(TrainState& state, const std::vector<std::vector<double>>& grads);

// Samples are produced on demand (encoding a node is much cheaper than
// holding every field in memory).
struct FitDataset {
  std::function<ComplexField(std::uint32_t node)> encode;
  std::vector<std::uint32_t> labels;
  std::vector<std::uint32_t> train_ids;
  std::vector<std::uint32_t> test_ids;
};

struct EpochMetrics {
  std::uint32_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_acc = 0.0;
  double test_acc = 0.0;
};

struct FitOptions {
  bool deterministic = false;  // strict sample-order gradient reduction
  std::uint32_t threads = 0;   // 0 = hardware concurrency
  bool normalize_detector = false;
  std::function<void(const EpochMetrics&)> on_epoch;
};

struct FitResult {
  TrainState state;
  std::vector<EpochMetrics> history;
};

// Mini-batch Adam training. Batch order comes from the seed's "batch"
// stream; per-sample gradients are always reduced in sample order, so equal
// seeds give byte-identical histories regardless of thread count.
FitResult fit(const NetworkConfig& topology, TrainState state, const FitDataset& data,
              const FitOptions& opts);

// Fraction of `ids` whose argmax detector region matches the label.
double evaluate_accuracy(const NetworkConfig& config, const FitDataset& data,
                         const std::vector<std::uint32_t>& ids, std::uint32_t threads = 0);

struct GradCheckReport {
  std::uint32_t params_checked = 0;
  double max_rel_err = 0.0;
  double median_rel_err = 0.0;
  double grad_rms = 0.0;      // RMS of analytic gradients over the sample
  double fd_step = 0.0;
  bool passed = false;        // max_rel_err <= tolerance
  double tolerance = 1e-5;
};

struct GradCheckOptions {
  std::uint32_t num_params = 64;
  double fd_step = 1e-6;
  double tolerance = 1e-5;
  std::uint64_t seed = 1;
};

// Central finite differences vs. backward() on the given (small) config.
// Relative error per parameter is |fd - an| / max(|fd|, |an|, rms) where rms
// is the RMS analytic gradient over the sampled set: parameters whose
// gradient sits far below the typical scale are held to the typical scale,
// because central differences cannot resolve them beyond the loss's own
// floating-point noise floor.
GradCheckReport grad_check(const NetworkConfig& config, const GradCheckOptions& opts);

// The stock gradcheck topology: 16x16 grid, 2 layers, skip 0->2, 2 classes
// with 4-px detector windows, random masks from the seed.
NetworkConfig grad_check_config(std::uint64_t seed);

}  // namespace holograph
