#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "holograph/field_engine.hpp"

namespace holograph {

struct Graph {
  std::uint32_t num_nodes = 0;
  std::uint32_t feature_dim = 0;
  std::uint32_t num_classes = 0;
  std::vector<std::vector<std::uint32_t>> adjacency;  // sorted, deduped, no self-loops
  std::vector<std::vector<double>> features;          // V rows of feature_dim
  std::vector<std::uint32_t> labels;

  std::size_t num_edges() const {
    std::size_t twice = 0;
    for (const auto& nb : adjacency) twice += nb.size();
    return twice / 2;
  }
};

// Reads edges.tsv / features.csv / labels.csv, symmetrizes and dedups edges,
// silently drops self-loops, then removes nodes that are isolated or have an
// all-zero feature row (single pass over the original graph) and reindexes.
// Throws ParseError with file and line on malformed input.
Graph load_dataset(const std::filesystem::path& dir);

struct PcaModel {
  std::uint32_t input_dim = 0;   // D
  std::uint32_t output_dim = 0;  // d
  std::vector<double> mean;                      // D
  std::vector<std::vector<double>> components;   // d rows of length D, orthonormal
  std::vector<double> variances;                 // d, non-increasing
};

// Centered covariance eigendecomposition, top-d components by variance.
// Components are sign-normalized: the largest-|entry| coordinate is positive.
PcaModel pca_fit(const std::vector<std::vector<double>>& features, std::uint32_t d);

// (X - mean) projected onto the components: V rows of d values.
std::vector<std::vector<double>> pca_transform(const PcaModel& model,
                                               const std::vector<std::vector<double>>& features);

// In-place min-max scaling to [0, 1]: global over all entries, or per row.
// Degenerate (max == min) blocks map to zero.
void minmax_normalize(std::vector<std::vector<double>>& m, bool per_row);

struct PprResult {
  std::vector<std::uint32_t> ids;  // <= k, by descending score (target tie-broken first)
  std::vector<double> scores;      // aligned with ids
};

// Approximate personalized PageRank by the push method: restart probability
// alpha, per-node residual threshold epsilon * degree. Guarantees
// |score - exact| <= epsilon * degree(node) and returns the top-k scored
// nodes; the target always makes the cut.
PprResult ppr_topk(const Graph& graph, std::uint32_t target, double alpha, double epsilon,
                   std::uint32_t k);

struct NodeSample {
  std::uint32_t target = 0;
  std::uint32_t label = 0;
  std::uint32_t k = 0;  // rows (selected nodes, zero-padded to k)
  std::uint32_t d = 0;  // columns (compressed feature dim)
  std::vector<double> rows;    // k*d row-major amplitudes in [0, 1]
  std::vector<double> scores;  // k, descending, zero-padded
};

// Centers the k x d block on the grid: amplitude = row values; phase = 0 or
// (pi/2) * score broadcast along each node's row when the flag is set.
ComplexField assemble_input(const NodeSample& sample, const GridSpec& grid,
                            bool encode_score_on_phase);

// Seeded uniform test sample without replacement ("split" stream); remainder
// trains. Both lists ascending.
struct Split {
  std::vector<std::uint32_t> train_ids, test_ids;
};
Split split(std::uint32_t num_nodes, std::uint32_t test_size, std::uint64_t seed);

}  // namespace holograph
