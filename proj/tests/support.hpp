#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "holograph/field_engine.hpp"
#include "holograph/rng.hpp"

namespace holograph::test {

// Random complex field scaled to unit total energy.
inline ComplexField random_unit_field(std::uint32_t n, Rng& rng) {
  ComplexField f(n);
  for (auto& v : f.a) v = {2.0 * rng.next_unit() - 1.0, 2.0 * rng.next_unit() - 1.0};
  double e = field_energy(f);
  const double s = 1.0 / std::sqrt(e);
  for (auto& v : f.a) v *= s;
  return f;
}

inline double max_abs_diff(const ComplexField& a, const ComplexField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.a.size(); ++i) m = std::max(m, std::abs(a.a[i] - b.a[i]));
  return m;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Centered Gaussian amplitude with 1/e^2 intensity waist w0 (metres).
inline ComplexField gaussian_field(std::uint32_t n, double pitch, double w0) {
  ComplexField f(n);
  const double mid = 0.5 * (n - 1);
  for (std::uint32_t r = 0; r < n; ++r) {
    for (std::uint32_t c = 0; c < n; ++c) {
      const double x = (c - mid) * pitch;
      const double y = (r - mid) * pitch;
      f.at(r, c) = std::exp(-(x * x + y * y) / (w0 * w0));
    }
  }
  return f;
}

// Intensity-weighted 1/e^2 beam radius along x, measured from second moments.
inline double beam_radius(const ComplexField& f, double pitch) {
  const std::uint32_t n = f.n;
  double total = 0.0, mean_x = 0.0;
  for (std::uint32_t r = 0; r < n; ++r)
    for (std::uint32_t c = 0; c < n; ++c) {
      const double I = std::norm(f.at(r, c));
      total += I;
      mean_x += I * c;
    }
  mean_x /= total;
  double var = 0.0;
  for (std::uint32_t r = 0; r < n; ++r)
    for (std::uint32_t c = 0; c < n; ++c) {
      const double dx = (c - mean_x) * pitch;
      var += std::norm(f.at(r, c)) * dx * dx;
    }
  var /= total;
  return 2.0 * std::sqrt(var);
}

inline double re_inner(const ComplexField& a, const ComplexField& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.a.size(); ++i)
    s += a.a[i].real() * b.a[i].real() + a.a[i].imag() * b.a[i].imag();
  return s;
}

}  // namespace holograph::test
