#include "holograph/field_engine.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fft_backend.hpp"

namespace holograph {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// e^{ikz} with kz up to ~1e7 rad: reducing z/lambda mod 1 in plain double
// loses ~1e-9 rad of phase, which alone would blow the 1e-10 semigroup
// budget. Split z/lambda into integer + high/low fractional parts (fma
// recovers the rounding error of the division) so the reduced phase is
// accurate to ~1 ulp.
cdouble carrier_phase(double z, double lambda) {
  const double q = z / lambda;
  const double r = std::fma(-q, lambda, z);  // exact residual of the divide
  const double frac = (q - std::floor(q)) + r / lambda;
  const double phi = kTwoPi * frac;
  return {std::cos(phi), std::sin(phi)};
}

void check_grid(const ComplexField& f, const GridSpec& grid) {
  if (f.n != grid.n) throw std::invalid_argument("field size does not match grid");
}

std::vector<cdouble> transfer_for(std::uint32_t n, double pitch, double lambda, double z) {
  std::vector<cdouble> h(static_cast<std::size_t>(n) * n);
  const cdouble carrier = carrier_phase(z, lambda);

  // fftfreq layout: index m maps to m/(n*pitch) for m <= (n-1)/2, else
  // (m-n)/(n*pitch). Precompute the squared frequencies once per axis.
  std::vector<double> fsq(n);
  const double df = 1.0 / (static_cast<double>(n) * pitch);
  for (std::uint32_t m = 0; m < n; ++m) {
    const double idx = (m <= (n - 1) / 2) ? static_cast<double>(m)
                                          : static_cast<double>(m) - static_cast<double>(n);
    const double f = idx * df;
    fsq[m] = f * f;
  }

  const double coef = -std::numbers::pi * lambda * z;
  for (std::uint32_t r = 0; r < n; ++r) {
    for (std::uint32_t c = 0; c < n; ++c) {
      const double phi = coef * (fsq[r] + fsq[c]);
      h[static_cast<std::size_t>(r) * n + c] =
          carrier * cdouble{std::cos(phi), std::sin(phi)};
    }
  }
  return h;
}

// Shared body for propagate / propagate_adjoint: apply the kernel (optionally
// conjugated) on the native grid or on a 2x zero-padded grid.
ComplexField propagate_impl(const ComplexField& f, const GridSpec& grid, double z, bool pad2x,
                            bool conj_kernel) {
  check_grid(f, grid);
  if (z == 0.0) return f;  // exact identity, also keeps zero-input gradients exactly zero

  if (!pad2x) {
    auto h = transfer_for(grid.n, grid.pitch, grid.wavelength, z);
    if (conj_kernel)
      for (auto& v : h) v = std::conj(v);
    ComplexField out(grid.n);
    fft::spectral_apply(f.a.data(), h.data(), out.a.data(), grid.n);
    return out;
  }

  const std::uint32_t n = grid.n, big = 2 * n, off = n / 2;
  auto h = transfer_for(big, grid.pitch, grid.wavelength, z);
  if (conj_kernel)
    for (auto& v : h) v = std::conj(v);
  ComplexField work(big);
  for (std::uint32_t r = 0; r < n; ++r)
    for (std::uint32_t c = 0; c < n; ++c) work.at(off + r, off + c) = f.at(r, c);
  fft::spectral_apply(work.a.data(), h.data(), work.a.data(), big);
  ComplexField out(n);
  for (std::uint32_t r = 0; r < n; ++r)
    for (std::uint32_t c = 0; c < n; ++c) out.at(r, c) = work.at(off + r, off + c);
  return out;
}

}  // namespace

DetectorLayout DetectorLayout::uniform(std::uint32_t n, std::uint32_t num_classes,
                                       std::uint32_t side) {
  if (num_classes == 0) throw std::invalid_argument("detector needs at least one class");
  std::uint32_t g = 1;
  while (g * g < num_classes) ++g;  // ceil(sqrt(C))
  const std::uint32_t cell = n / g;
  if (side == 0 || side > cell)
    throw std::invalid_argument("detector side " + std::to_string(side) +
                                " does not fit a " + std::to_string(cell) + "-px cell");
  const std::uint32_t base = (n - g * cell) / 2;
  const std::uint32_t pad = (cell - side) / 2;

  DetectorLayout layout;
  layout.regions.reserve(num_classes);
  for (std::uint32_t i = 0; i < num_classes; ++i) {
    const std::uint32_t r = i / g, c = i % g;
    layout.regions.push_back(
        {base + r * cell + pad, base + c * cell + pad, side, side});
  }
  return layout;
}

std::vector<cdouble> fresnel_transfer(const GridSpec& grid, double z) {
  return transfer_for(grid.n, grid.pitch, grid.wavelength, z);
}

ComplexField propagate(const ComplexField& f, const GridSpec& grid, double z, bool pad2x) {
  return propagate_impl(f, grid, z, pad2x, /*conj_kernel=*/false);
}

ComplexField propagate_adjoint(const ComplexField& f, const GridSpec& grid, double z,
                               bool pad2x) {
  return propagate_impl(f, grid, z, pad2x, /*conj_kernel=*/true);
}

ComplexField modulate(const ComplexField& f, const PhaseMask& mask) {
  if (f.n != mask.n) throw std::invalid_argument("mask size does not match field");
  ComplexField out(f.n);
  for (std::size_t i = 0; i < f.a.size(); ++i) {
    const double t = mask.theta[i];
    out.a[i] = f.a[i] * cdouble{std::cos(t), std::sin(t)};
  }
  return out;
}

ComplexField diff_msg(const ComplexField& f, const PhaseMask& mask, const GridSpec& grid,
                      double z, bool pad2x) {
  return modulate(propagate(f, grid, z, pad2x), mask);
}

std::vector<double> intensity(const ComplexField& f) {
  std::vector<double> out(f.a.size());
  for (std::size_t i = 0; i < f.a.size(); ++i) out[i] = std::norm(f.a[i]);
  return out;
}

std::vector<double> detect(const std::vector<double>& intensity_map, std::uint32_t n,
                           const DetectorLayout& layout, bool normalize) {
  if (intensity_map.size() != static_cast<std::size_t>(n) * n)
    throw std::invalid_argument("intensity map size does not match grid");
  std::vector<double> sums(layout.regions.size(), 0.0);
  for (std::size_t i = 0; i < layout.regions.size(); ++i) {
    const auto& reg = layout.regions[i];
    if (reg.row0 + reg.height > n || reg.col0 + reg.width > n)
      throw std::invalid_argument("detector region out of bounds");
    double s = 0.0;
    for (std::uint32_t r = 0; r < reg.height; ++r) {
      const double* row = intensity_map.data() + static_cast<std::size_t>(reg.row0 + r) * n;
      for (std::uint32_t c = 0; c < reg.width; ++c) s += row[reg.col0 + c];
    }
    sums[i] = s;
  }
  if (normalize) {
    double total = 0.0;
    for (double s : sums) total += s;
    if (total > 0.0)
      for (double& s : sums) s /= total;
  }
  return sums;
}

double field_energy(const ComplexField& f) {
  double e = 0.0;
  for (const auto& v : f.a) e += std::norm(v);
  return e;
}

}  // namespace holograph
