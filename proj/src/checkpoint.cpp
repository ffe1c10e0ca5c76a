#include <cstring>

#include "holograph/errors.hpp"
#include "holograph/io_util.hpp"
#include "holograph/network.hpp"

namespace holograph {

namespace {
constexpr char kMagic[4] = {'H', 'G', 'R', '1'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

void save_checkpoint(const NetworkConfig& config, const OptimizerMoments* moments,
                     const std::filesystem::path& path) {
  validate(config);
  if (moments &&
      (moments->m.size() != config.num_layers || moments->v.size() != config.num_layers))
    throw std::invalid_argument("optimizer moment count does not match layer count");

  BinWriter w;
  w.bytes(kMagic, 4);
  w.u32(kVersion);
  w.u32(config.grid.n);
  w.u32(config.num_layers);
  w.u32(static_cast<std::uint32_t>(config.skips.size()));
  for (const auto& s : config.skips) {
    w.u32(s.from);
    w.u32(s.to);
  }
  w.f64(config.grid.wavelength);
  w.f64(config.layer_distance);
  w.f64(config.grid.pitch);
  w.u32(config.detector.num_classes());
  for (const auto& r : config.detector.regions) {
    w.u32(r.row0);
    w.u32(r.col0);
    w.u32(r.height);
    w.u32(r.width);
  }
  for (const auto& mask : config.masks) w.f64_array(mask.theta.data(), mask.theta.size());
  w.u8(moments ? 1 : 0);
  if (moments) {
    for (std::uint32_t l = 0; l < config.num_layers; ++l) {
      const auto& m = moments->m[l];
      const auto& v = moments->v[l];
      if (m.size() != config.grid.pixels() || v.size() != config.grid.pixels())
        throw std::invalid_argument("optimizer moment shape does not match masks");
      w.f64_array(m.data(), m.size());
      w.f64_array(v.data(), v.size());
    }
  }
  w.commit(path);
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  BinReader r = BinReader::from_file(path);

  char magic[4];
  r.raw(magic, 4, "magic");
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw FormatError("bad magic bytes", 0, "magic");
  const std::uint32_t version = r.u32("version");
  if (version != kVersion)
    throw FormatError("unsupported version " + std::to_string(version), 4, "version");

  LoadedCheckpoint out;
  NetworkConfig& cfg = out.config;
  cfg.grid.n = r.u32("grid size");
  if (cfg.grid.n == 0 || cfg.grid.n > 8192)
    throw FormatError("implausible grid size " + std::to_string(cfg.grid.n), r.offset() - 4,
                      "grid size");
  cfg.num_layers = r.u32("layer count");
  if (cfg.num_layers == 0 || cfg.num_layers > 4096)
    throw FormatError("implausible layer count " + std::to_string(cfg.num_layers),
                      r.offset() - 4, "layer count");

  const std::uint32_t num_skips = r.u32("skip count");
  if (num_skips > 100000)
    throw FormatError("implausible skip count", r.offset() - 4, "skip count");
  for (std::uint32_t i = 0; i < num_skips; ++i) {
    const std::size_t rec_off = r.offset();
    SkipChannel s;
    s.from = r.u32("skip table");
    s.to = r.u32("skip table");
    if (s.from >= s.to || s.to > cfg.num_layers)
      throw FormatError("invalid skip " + std::to_string(s.from) + "->" + std::to_string(s.to),
                        rec_off, "skip table");
    cfg.skips.push_back(s);
  }

  cfg.grid.wavelength = r.f64("wavelength");
  cfg.layer_distance = r.f64("layer distance");
  cfg.grid.pitch = r.f64("pitch");
  if (!(cfg.grid.wavelength > 0) || !(cfg.grid.pitch > 0) || !(cfg.layer_distance >= 0))
    throw FormatError("non-physical geometry", r.offset() - 24, "geometry");

  const std::uint32_t num_classes = r.u32("class count");
  if (num_classes == 0 || num_classes > 100000)
    throw FormatError("implausible class count", r.offset() - 4, "class count");
  for (std::uint32_t i = 0; i < num_classes; ++i) {
    const std::size_t rec_off = r.offset();
    DetectorRegion reg;
    reg.row0 = r.u32("detector table");
    reg.col0 = r.u32("detector table");
    reg.height = r.u32("detector table");
    reg.width = r.u32("detector table");
    if (reg.row0 + reg.height > cfg.grid.n || reg.col0 + reg.width > cfg.grid.n)
      throw FormatError("detector region out of bounds", rec_off, "detector table");
    cfg.detector.regions.push_back(reg);
  }

  // Guard the big allocations: the declared topology must fit in what is
  // actually left in the file.
  const std::size_t px = cfg.grid.pixels();
  const std::size_t mask_bytes = static_cast<std::size_t>(cfg.num_layers) * px * 8;
  if (r.surplus() < mask_bytes)
    throw FormatError("file too small for declared masks", r.offset(), "masks");
  cfg.masks.reserve(cfg.num_layers);
  for (std::uint32_t l = 0; l < cfg.num_layers; ++l) {
    PhaseMask mask(cfg.grid.n);
    r.f64_array(mask.theta.data(), px, "mask " + std::to_string(l));
    cfg.masks.push_back(std::move(mask));
  }
  cfg.feature_layers = std::min<std::uint32_t>(3, cfg.num_layers);

  const std::uint8_t flag = r.u8("optimizer flag");
  if (flag > 1) throw FormatError("optimizer flag must be 0 or 1", r.offset() - 1,
                                  "optimizer flag");
  if (flag == 1) {
    if (r.surplus() < 2 * mask_bytes)
      throw FormatError("file too small for declared optimizer state", r.offset(),
                        "optimizer state");
    OptimizerMoments mom;
    mom.m.resize(cfg.num_layers);
    mom.v.resize(cfg.num_layers);
    for (std::uint32_t l = 0; l < cfg.num_layers; ++l) {
      mom.m[l].resize(px);
      mom.v[l].resize(px);
      r.f64_array(mom.m[l].data(), px, "optimizer first moment " + std::to_string(l));
      r.f64_array(mom.v[l].data(), px, "optimizer second moment " + std::to_string(l));
    }
    out.moments = std::move(mom);
  }

  if (r.surplus() != 0)
    throw FormatError(std::to_string(r.surplus()) + " trailing bytes", r.offset(),
                      "end of file");
  validate(cfg);
  return out;
}

}  // namespace holograph
