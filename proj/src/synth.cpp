#include "holograph/synth.hpp"

#include <set>
#include <string>

#include "holograph/io_util.hpp"
#include "holograph/rng.hpp"

namespace holograph {

void generate_synthetic(const std::filesystem::path& out_dir, std::uint64_t seed) {
  constexpr std::uint32_t kPerClass = 50;
  constexpr std::uint32_t kDim = 16;
  constexpr std::uint32_t kBridges = 5;
  constexpr double kNoise = 0.05;

  std::filesystem::create_directories(out_dir);
  Rng rng = Rng::stream(seed, "synth");

  std::string edges;
  for (std::uint32_t cls = 0; cls < 2; ++cls) {
    const std::uint32_t base = cls * kPerClass;
    for (std::uint32_t i = 0; i < kPerClass; ++i)
      for (std::uint32_t j = i + 1; j < kPerClass; ++j)
        edges += std::to_string(base + i) + "\t" + std::to_string(base + j) + "\n";
  }
  std::set<std::pair<std::uint32_t, std::uint32_t>> bridges;
  while (bridges.size() < kBridges) {
    const auto a = static_cast<std::uint32_t>(rng.next_below(kPerClass));
    const auto b = static_cast<std::uint32_t>(kPerClass + rng.next_below(kPerClass));
    bridges.insert({a, b});
  }
  for (const auto& [a, b] : bridges)
    edges += std::to_string(a) + "\t" + std::to_string(b) + "\n";

  std::string features, labels;
  for (std::uint32_t v = 0; v < 2 * kPerClass; ++v) {
    const std::uint32_t cls = v / kPerClass;
    for (std::uint32_t j = 0; j < kDim; ++j) {
      // orthogonal prototypes: class 0 lives in dims 0..7, class 1 in 8..15
      const double proto = (j / 8 == cls) ? 1.0 : 0.0;
      const double x = proto + kNoise * rng.next_normal();
      if (j) features += ",";
      features += format_double(x);
    }
    features += "\n";
    labels += std::to_string(cls) + "\n";
  }

  write_text_atomic(out_dir / "edges.tsv", edges);
  write_text_atomic(out_dir / "features.csv", features);
  write_text_atomic(out_dir / "labels.csv", labels);
}

}  // namespace holograph
