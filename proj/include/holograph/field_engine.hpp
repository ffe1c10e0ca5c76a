#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace holograph {

using cdouble = std::complex<double>;

// Square simulation grid: n x n pixels of size `pitch` metres, illuminated at
// `wavelength` metres. Everything downstream (propagation kernels, masks,
// detector layout) is sized off this.
struct GridSpec {
  std::uint32_t n = 200;
  double pitch = 36e-6;
  double wavelength = 532e-9;

  std::size_t pixels() const { return static_cast<std::size_t>(n) * n; }
};

// Row-major n x n complex amplitude.
struct ComplexField {
  std::uint32_t n = 0;
  std::vector<cdouble> a;

  ComplexField() = default;
  explicit ComplexField(std::uint32_t n_) : n(n_), a(static_cast<std::size_t>(n_) * n_) {}

  cdouble& at(std::uint32_t r, std::uint32_t c) { return a[static_cast<std::size_t>(r) * n + c]; }
  const cdouble& at(std::uint32_t r, std::uint32_t c) const {
    return a[static_cast<std::size_t>(r) * n + c];
  }
  std::size_t size() const { return a.size(); }
};

// Row-major n x n phase surface, radians. The trainable parameters.
struct PhaseMask {
  std::uint32_t n = 0;
  std::vector<double> theta;

  PhaseMask() = default;
  explicit PhaseMask(std::uint32_t n_) : n(n_), theta(static_cast<std::size_t>(n_) * n_, 0.0) {}
};

// One readout region per class: intensity is summed over the rectangle.
struct DetectorRegion {
  std::uint32_t row0 = 0, col0 = 0, height = 0, width = 0;
};

struct DetectorLayout {
  std::vector<DetectorRegion> regions;

  // Centered ceil(sqrt(C)) x ceil(sqrt(C)) grid of cells, one centered
  // side x side window per class, row-major class order. Throws if the
  // window does not fit in a cell.
  static DetectorLayout uniform(std::uint32_t n, std::uint32_t num_classes, std::uint32_t side);

  std::uint32_t num_classes() const { return static_cast<std::uint32_t>(regions.size()); }
};

// Frequency-space Fresnel transfer function for distance z, FFT index order
// (DC at [0][0]). propagate() multiplies the input spectrum by this.
std::vector<cdouble> fresnel_transfer(const GridSpec& grid, double z);

// Fresnel propagation over distance z via the transfer-function method.
// pad2x embeds the field in a 2n grid before the FFT pair to suppress
// wrap-around, then crops back; default off (the paper's sizes don't need it
// and training loops are cheaper without).
ComplexField propagate(const ComplexField& f, const GridSpec& grid, double z, bool pad2x = false);

// Adjoint of propagate under the real inner product Re<u,v>: propagation with
// the conjugated kernel. Used by backprop; equals propagate(f, -z) only up to
// the conjugated e^{ikz} carrier, so it gets its own entry point.
ComplexField propagate_adjoint(const ComplexField& f, const GridSpec& grid, double z,
                               bool pad2x = false);

// Pointwise e^{i theta} modulation.
ComplexField modulate(const ComplexField& f, const PhaseMask& mask);

// One network step: propagate by z, then modulate.
ComplexField diff_msg(const ComplexField& f, const PhaseMask& mask, const GridSpec& grid,
                      double z, bool pad2x = false);

// |a|^2 per pixel.
std::vector<double> intensity(const ComplexField& f);

// Per-class pixel sums of an n x n intensity map over the layout's regions.
// normalize divides by the total detected energy (sum over all regions),
// guarding zero. Throws std::invalid_argument if a region exceeds the grid.
std::vector<double> detect(const std::vector<double>& intensity_map, std::uint32_t n,
                           const DetectorLayout& layout, bool normalize = false);

// Sum over all pixels of |a|^2.
double field_energy(const ComplexField& f);

}  // namespace holograph
