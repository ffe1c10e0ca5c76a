#include "holograph/network.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "fft_backend.hpp"

namespace holograph {

void validate(const NetworkConfig& config) {
  if (config.grid.n == 0) throw std::invalid_argument("grid size must be positive");
  if (config.grid.pitch <= 0 || config.grid.wavelength <= 0)
    throw std::invalid_argument("pitch and wavelength must be positive");
  if (!(config.layer_distance >= 0) || !std::isfinite(config.layer_distance))
    throw std::invalid_argument("layer distance must be finite and nonnegative");
  if (config.num_layers == 0) throw std::invalid_argument("need at least one layer");
  if (config.masks.size() != config.num_layers)
    throw std::invalid_argument("mask count " + std::to_string(config.masks.size()) +
                                " does not match num_layers " +
                                std::to_string(config.num_layers));
  for (const auto& m : config.masks)
    if (m.n != config.grid.n) throw std::invalid_argument("mask size does not match grid");

  std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
  for (const auto& s : config.skips) {
    if (s.from >= s.to)
      throw std::invalid_argument("skip must go forward: " + std::to_string(s.from) + "->" +
                                  std::to_string(s.to));
    if (s.to > config.num_layers)
      throw std::invalid_argument("skip target " + std::to_string(s.to) +
                                  " beyond layer count");
    if (!seen.insert({s.from, s.to}).second)
      throw std::invalid_argument("duplicate skip " + std::to_string(s.from) + "->" +
                                  std::to_string(s.to));
  }
  for (const auto& reg : config.detector.regions)
    if (reg.row0 + reg.height > config.grid.n || reg.col0 + reg.width > config.grid.n)
      throw std::invalid_argument("detector region out of bounds");
}

std::vector<SkipChannel> build_setup(const std::string& id) {
  std::string key = id;
  if (key.rfind("setup", 0) == 0) key = key.substr(5);
  if (key.empty() || key == "none") return {};

  if (key == "1") return {{0, 2}, {0, 3}};
  if (key == "2") return {{0, 4}, {0, 5}, {0, 6}};
  if (key == "3") return {{1, 4}, {2, 4}};
  if (key == "4") return {{3, 5}, {3, 6}};
  if (key == "5") return {{0, 4}, {1, 4}, {2, 4}};
  if (key == "6") return {{0, 4}, {1, 5}, {2, 6}};

  // Explicit list: "a-b,c-d" or "a->b,c->d".
  std::vector<SkipChannel> out;
  std::size_t pos = 0;
  while (pos < key.size()) {
    std::size_t end = key.find(',', pos);
    if (end == std::string::npos) end = key.size();
    std::string item = key.substr(pos, end - pos);
    std::size_t sep = item.find("->");
    std::size_t sep_len = 2;
    if (sep == std::string::npos) {
      sep = item.find('-');
      sep_len = 1;
    }
    if (sep == std::string::npos || sep == 0 || sep + sep_len >= item.size())
      throw std::invalid_argument("unrecognized skip setup '" + id + "'");
    try {
      std::size_t used = 0;
      unsigned long a = std::stoul(item.substr(0, sep), &used);
      if (used != sep) throw std::invalid_argument("");
      unsigned long b = std::stoul(item.substr(sep + sep_len), &used);
      if (used != item.size() - sep - sep_len) throw std::invalid_argument("");
      out.push_back({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)});
    } catch (const std::exception&) {
      throw std::invalid_argument("unrecognized skip setup '" + id + "'");
    }
    pos = end + 1;
  }
  if (out.empty()) throw std::invalid_argument("unrecognized skip setup '" + id + "'");
  return out;
}

void NetworkPlan::set_masks(const std::vector<PhaseMask>& masks) {
  if (masks.size() != num_layers)
    throw std::invalid_argument("mask count does not match plan");
  mask_factors.resize(masks.size());
  for (std::size_t l = 0; l < masks.size(); ++l) {
    const auto& theta = masks[l].theta;
    auto& fac = mask_factors[l];
    fac.resize(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i)
      fac[i] = {std::cos(theta[i]), std::sin(theta[i])};
  }
}

NetworkPlan make_plan(const NetworkConfig& config) {
  validate(config);
  NetworkPlan plan;
  plan.grid = config.grid;
  plan.layer_distance = config.layer_distance;
  plan.num_layers = config.num_layers;
  plan.pad = config.pad_propagation;
  plan.skips = config.skips;

  std::set<std::uint32_t> hops{1};
  for (const auto& s : config.skips) hops.insert(s.to - s.from);
  const std::uint32_t kn = plan.pad ? 2 * config.grid.n : config.grid.n;
  GridSpec kgrid{kn, config.grid.pitch, config.grid.wavelength};
  for (std::uint32_t h : hops) {
    plan.kernel_hops.push_back(h);
    plan.kernels.push_back(fresnel_transfer(kgrid, h * config.layer_distance));
  }
  plan.set_masks(config.masks);
  return plan;
}

namespace {

const std::vector<cdouble>& kernel_for(const NetworkPlan& plan, std::uint32_t hops) {
  auto it = std::lower_bound(plan.kernel_hops.begin(), plan.kernel_hops.end(), hops);
  if (it == plan.kernel_hops.end() || *it != hops)
    throw std::invalid_argument("plan has no kernel for hop count " + std::to_string(hops));
  return plan.kernels[static_cast<std::size_t>(it - plan.kernel_hops.begin())];
}

ComplexField apply_kernel(const ComplexField& f, const std::vector<cdouble>& kernel,
                          std::uint32_t n, bool pad, bool adjoint) {
  // Adjoint = conjugated kernel; conjugate on the fly into a scratch copy.
  const std::vector<cdouble>* k = &kernel;
  std::vector<cdouble> conj_k;
  if (adjoint) {
    conj_k.resize(kernel.size());
    for (std::size_t i = 0; i < kernel.size(); ++i) conj_k[i] = std::conj(kernel[i]);
    k = &conj_k;
  }
  if (!pad) {
    ComplexField out(n);
    fft::spectral_apply(f.a.data(), k->data(), out.a.data(), n);
    return out;
  }
  const std::uint32_t big = 2 * n, off = n / 2;
  ComplexField work(big);
  for (std::uint32_t r = 0; r < n; ++r)
    for (std::uint32_t c = 0; c < n; ++c) work.at(off + r, off + c) = f.at(r, c);
  fft::spectral_apply(work.a.data(), k->data(), work.a.data(), big);
  ComplexField out(n);
  for (std::uint32_t r = 0; r < n; ++r)
    for (std::uint32_t c = 0; c < n; ++c) out.at(r, c) = work.at(off + r, off + c);
  return out;
}

}  // namespace

ComplexField plan_propagate(const NetworkPlan& plan, const ComplexField& f, std::uint32_t hops,
                            bool adjoint) {
  if (f.n != plan.grid.n) throw std::invalid_argument("field size does not match plan");
  if (plan.layer_distance == 0.0) return f;  // exact identity, matching propagate()
  return apply_kernel(f, kernel_for(plan, hops), plan.grid.n, plan.pad, adjoint);
}

ComplexField merge_fields(const std::vector<const ComplexField*>& fields) {
  if (fields.empty()) throw std::invalid_argument("merge needs at least one field");
  const ComplexField& f0 = *fields[0];
  if (fields.size() == 1) return f0;
  ComplexField out = f0;
  const double inv = 1.0 / static_cast<double>(fields.size());
  for (std::size_t i = 0; i < out.a.size(); ++i) {
    cdouble acc{0.0, 0.0};
    for (std::size_t j = 1; j < fields.size(); ++j) acc += fields[j]->a[i] - f0.a[i];
    out.a[i] += acc * inv;
  }
  return out;
}

ForwardResult forward_with_plan(const NetworkPlan& plan, const ComplexField& input) {
  if (input.n != plan.grid.n) throw std::invalid_argument("input size does not match plan");
  if (plan.mask_factors.size() != plan.num_layers)
    throw std::invalid_argument("plan masks not set");

  ForwardResult res;
  res.stations.reserve(plan.num_layers + 1);
  res.stations.push_back(input);

  // Skip arrivals computed lazily per destination layer, in skip-list order.
  for (std::uint32_t layer = 1; layer <= plan.num_layers; ++layer) {
    std::vector<ComplexField> arrivals;
    for (const auto& s : plan.skips)
      if (s.to == layer)
        arrivals.push_back(plan_propagate(plan, res.stations[s.from], s.to - s.from));

    const ComplexField* mainline = &res.stations.back();
    ComplexField merged;
    if (!arrivals.empty()) {
      std::vector<const ComplexField*> parts{mainline};
      for (const auto& a : arrivals) parts.push_back(&a);
      merged = merge_fields(parts);
      mainline = &merged;
    }

    ComplexField prop = plan_propagate(plan, *mainline, 1);
    const auto& fac = plan.mask_factors[layer - 1];
    for (std::size_t i = 0; i < prop.a.size(); ++i) prop.a[i] *= fac[i];
    res.stations.push_back(std::move(prop));
  }

  res.intensity_map = intensity(res.stations.back());
  return res;
}

ForwardResult forward(const NetworkConfig& config, const ComplexField& input) {
  return forward_with_plan(make_plan(config), input);
}

std::uint32_t predict(const NetworkConfig& config, const ComplexField& input) {
  auto res = forward(config, input);
  auto sums = detect(res.intensity_map, config.grid.n, config.detector);
  std::uint32_t best = 0;
  for (std::uint32_t i = 1; i < sums.size(); ++i)
    if (sums[i] > sums[best]) best = i;  // strict >: ties keep the lowest index
  return best;
}

}  // namespace holograph
