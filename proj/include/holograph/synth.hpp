#pragma once

#include <cstdint>
#include <filesystem>

namespace holograph {

// Two-class sanity dataset: a pair of 50-node cliques joined by a few sparse
// bridges, 16-dim features built from orthogonal class prototypes plus seeded
// Gaussian noise. Written in the standard dataset directory format;
// byte-identical for equal seeds.
void generate_synthetic(const std::filesystem::path& out_dir, std::uint64_t seed);

}  // namespace holograph
