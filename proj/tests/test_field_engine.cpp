#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <thread>

#include "holograph/field_engine.hpp"
#include "support.hpp"

using namespace holograph;
using namespace holograph::test;

namespace {
constexpr double kPi = std::numbers::pi;
const GridSpec kSmall{64, 36e-6, 532e-9};   // fast grid for property sweeps
const GridSpec kPaper{200, 36e-6, 532e-9};  // the default system size
}  // namespace

TEST_CASE("transfer function has unit modulus everywhere") {
  for (double z : {1e-3, 0.01, 0.3}) {
    auto h = fresnel_transfer(kSmall, z);
    for (const auto& v : h) CHECK(std::abs(std::abs(v) - 1.0) < 1e-14);
  }
}

TEST_CASE("transfer DC phase matches long-double reduction of 2*pi*z/lambda") {
  // Oracle computed in 80-bit arithmetic: q = z/lambda ~ 2e4, so long double
  // keeps the fractional part to ~1e-15 rad, far inside the 1e-8 gate.
  for (double z : {0.01, 0.02, 0.05, 0.107}) {
    auto h = fresnel_transfer(kPaper, z);
    const long double q = static_cast<long double>(z) / static_cast<long double>(kPaper.wavelength);
    const long double frac = q - std::floor(q);
    const double want = static_cast<double>(2.0L * std::numbers::pi_v<long double> * frac);
    double got = std::arg(h[0]);
    if (got < 0) got += 2.0 * kPi;
    double diff = std::abs(got - want);
    diff = std::min(diff, 2.0 * kPi - diff);  // circular distance
    CHECK(diff < 1e-8);
  }
}

TEST_CASE("zero distance is the exact identity") {
  Rng rng(11);
  auto f = random_unit_field(kSmall.n, rng);
  auto g = propagate(f, kSmall, 0.0);
  CHECK(max_abs_diff(f, g) == 0.0);
}

TEST_CASE("propagation conserves energy") {
  Rng rng(12);
  for (std::uint32_t n : {32u, 64u, 200u}) {
    GridSpec grid{n, 36e-6, 532e-9};
    auto f = random_unit_field(n, rng);
    for (double z : {1e-3, 0.01, 0.25}) {
      auto g = propagate(f, grid, z);
      CHECK(std::abs(field_energy(g) - field_energy(f)) / field_energy(f) < 1e-12);
    }
  }
}

TEST_CASE("propagation is a semigroup in distance") {
  // Distances chosen so z1 + z2 is exact in binary floating point; otherwise
  // the test would compare kernels at genuinely different distances.
  Rng rng(13);
  auto f = random_unit_field(kSmall.n, rng);
  struct Pair {
    double z1, z2;
  };
  for (auto [z1, z2] : {Pair{0.01, 0.01}, Pair{0.0078125, 0.015625}, Pair{0.25, 0.0625}}) {
    auto two_hop = propagate(propagate(f, kSmall, z1), kSmall, z2);
    auto one_hop = propagate(f, kSmall, z1 + z2);
    CHECK(max_abs_diff(two_hop, one_hop) < 1e-10);
  }
}

TEST_CASE("propagation is linear in the field") {
  Rng rng(14);
  auto f = random_unit_field(kSmall.n, rng);
  auto g = random_unit_field(kSmall.n, rng);
  const cdouble a{0.3, -0.7}, b{-0.5, 0.2};
  ComplexField mix(kSmall.n);
  for (std::size_t i = 0; i < mix.a.size(); ++i) mix.a[i] = a * f.a[i] + b * g.a[i];
  auto lhs = propagate(mix, kSmall, 0.02);
  auto pf = propagate(f, kSmall, 0.02);
  auto pg = propagate(g, kSmall, 0.02);
  ComplexField rhs(kSmall.n);
  for (std::size_t i = 0; i < rhs.a.size(); ++i) rhs.a[i] = a * pf.a[i] + b * pg.a[i];
  CHECK(max_abs_diff(lhs, rhs) < 1e-10);
}

TEST_CASE("gaussian beam spreads per the analytic waist formula") {
  const GridSpec grid{256, 36e-6, 532e-9};
  const double w0 = 400e-6;
  const double zr = kPi * w0 * w0 / grid.wavelength;
  auto f = gaussian_field(grid.n, grid.pitch, w0);
  CHECK(std::abs(beam_radius(f, grid.pitch) - w0) / w0 < 0.02);
  for (double z : {0.3, 0.5, 0.9}) {
    auto g = propagate(f, grid, z);
    const double want = w0 * std::sqrt(1.0 + (z / zr) * (z / zr));
    CHECK(std::abs(beam_radius(g, grid.pitch) - want) / want < 0.02);
  }
}

TEST_CASE("modulation is an exact pointwise isometry") {
  Rng rng(15);
  auto f = random_unit_field(kSmall.n, rng);
  PhaseMask mask(kSmall.n);
  for (auto& t : mask.theta) t = 2.0 * kPi * rng.next_unit();
  auto g = modulate(f, mask);
  for (std::size_t i = 0; i < f.a.size(); ++i)
    CHECK(std::abs(std::abs(g.a[i]) - std::abs(f.a[i])) < 1e-14);
}

TEST_CASE("zero mask is the exact identity, pi mask flips sign") {
  Rng rng(16);
  auto f = random_unit_field(kSmall.n, rng);
  PhaseMask zero(kSmall.n);
  CHECK(max_abs_diff(modulate(f, zero), f) == 0.0);

  PhaseMask pi_mask(kSmall.n);
  for (auto& t : pi_mask.theta) t = kPi;
  auto g = modulate(f, pi_mask);
  double worst = 0.0;
  for (std::size_t i = 0; i < f.a.size(); ++i)
    worst = std::max(worst, std::abs(g.a[i] + f.a[i]));
  CHECK(worst < 1e-15);
}

TEST_CASE("diff_msg is exactly modulate after propagate and conserves energy") {
  Rng rng(17);
  auto f = random_unit_field(kSmall.n, rng);
  PhaseMask mask(kSmall.n);
  for (auto& t : mask.theta) t = 2.0 * kPi * rng.next_unit();
  auto got = diff_msg(f, mask, kSmall, 0.01);
  auto want = modulate(propagate(f, kSmall, 0.01), mask);
  CHECK(max_abs_diff(got, want) == 0.0);
  CHECK(std::abs(field_energy(got) - field_energy(f)) / field_energy(f) < 1e-12);

  PhaseMask zero(kSmall.n);
  CHECK(max_abs_diff(diff_msg(f, zero, kSmall, 0.0), f) == 0.0);
}

TEST_CASE("intensity basics") {
  ComplexField f(8);
  f.at(2, 3) = {3.0, 4.0};
  auto I = intensity(f);
  CHECK(I[2 * 8 + 3] == doctest::Approx(25.0));
  for (std::size_t i = 0; i < I.size(); ++i)
    if (i != 2 * 8 + 3) CHECK(I[i] == 0.0);

  // invariant under global phase
  Rng rng(18);
  auto g = random_unit_field(16, rng);
  ComplexField h = g;
  const cdouble phase = std::polar(1.0, 1.234);
  for (auto& v : h.a) v *= phase;
  CHECK(max_abs_diff(intensity(g), intensity(h)) < 1e-15);
}

TEST_CASE("detector layout follows the centered-grid rule") {
  // C=7 on n=200: 3x3 cells of 66 px, block offset 1, window inset 23.
  auto layout = DetectorLayout::uniform(200, 7, 20);
  REQUIRE(layout.regions.size() == 7);
  CHECK(layout.regions[0].row0 == 24);
  CHECK(layout.regions[0].col0 == 24);
  CHECK(layout.regions[1].col0 == 90);
  CHECK(layout.regions[3].row0 == 90);
  CHECK(layout.regions[6].row0 == 156);
  CHECK(layout.regions[6].col0 == 24);
  for (const auto& r : layout.regions) {
    CHECK(r.height == 20);
    CHECK(r.width == 20);
    CHECK(r.row0 + r.height <= 200);
    CHECK(r.col0 + r.width <= 200);
  }

  // Regions never overlap for any feasible (C, side).
  for (std::uint32_t C : {2u, 3u, 4u, 7u, 10u}) {
    auto lay = DetectorLayout::uniform(64, C, 5);
    std::vector<int> owner(64 * 64, -1);
    for (std::size_t i = 0; i < lay.regions.size(); ++i) {
      const auto& reg = lay.regions[i];
      for (std::uint32_t r = reg.row0; r < reg.row0 + reg.height; ++r)
        for (std::uint32_t c = reg.col0; c < reg.col0 + reg.width; ++c) {
          CHECK(owner[r * 64 + c] == -1);
          owner[r * 64 + c] = static_cast<int>(i);
        }
    }
  }

  CHECK_THROWS_AS(DetectorLayout::uniform(64, 7, 22), std::invalid_argument);
  CHECK_THROWS_AS(DetectorLayout::uniform(64, 4, 0), std::invalid_argument);
}

TEST_CASE("detect matches brute-force pixel sums") {
  Rng rng(19);
  const std::uint32_t n = 200;
  std::vector<double> I(static_cast<std::size_t>(n) * n);
  for (auto& v : I) v = rng.next_unit();
  auto layout = DetectorLayout::uniform(n, 7, 20);
  auto sums = detect(I, n, layout);

  std::vector<double> brute(7, 0.0);
  for (std::uint32_t r = 0; r < n; ++r)
    for (std::uint32_t c = 0; c < n; ++c)
      for (std::size_t k = 0; k < layout.regions.size(); ++k) {
        const auto& reg = layout.regions[k];
        if (r >= reg.row0 && r < reg.row0 + reg.height && c >= reg.col0 &&
            c < reg.col0 + reg.width)
          brute[k] += I[static_cast<std::size_t>(r) * n + c];
      }
  for (std::size_t k = 0; k < 7; ++k)
    CHECK(std::abs(sums[k] - brute[k]) <= 1e-12 * brute[k]);

  double region_total = 0.0, grid_total = 0.0;
  for (double s : sums) region_total += s;
  for (double v : I) grid_total += v;
  CHECK(region_total <= grid_total);

  // single bright pixel lands in exactly one class
  std::vector<double> spot(I.size(), 0.0);
  const auto& reg2 = layout.regions[2];
  spot[static_cast<std::size_t>(reg2.row0 + 1) * n + reg2.col0 + 3] = 7.5;
  auto s2 = detect(spot, n, layout);
  for (std::size_t k = 0; k < s2.size(); ++k)
    CHECK(s2[k] == (k == 2 ? 7.5 : 0.0));

  // normalized sums add to one
  auto sn = detect(I, n, layout, true);
  double tot = 0.0;
  for (double s : sn) tot += s;
  CHECK(tot == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("detect rejects regions outside the grid") {
  std::vector<double> I(16 * 16, 0.0);
  DetectorLayout bad;
  bad.regions.push_back({10, 10, 8, 8});
  CHECK_THROWS_AS(detect(I, 16, bad, false), std::invalid_argument);
}

TEST_CASE("adjoint propagation satisfies the inner-product identity") {
  Rng rng(20);
  auto f = random_unit_field(kSmall.n, rng);
  auto g = random_unit_field(kSmall.n, rng);
  for (bool pad : {false, true}) {
    auto pf = propagate(f, kSmall, 0.02, pad);
    auto ag = propagate_adjoint(g, kSmall, 0.02, pad);
    CHECK(std::abs(re_inner(pf, g) - re_inner(f, ag)) < 1e-12);
  }
}

TEST_CASE("padded propagation reproduces unpadded physics for contained beams") {
  const GridSpec grid{128, 36e-6, 532e-9};
  auto f = gaussian_field(grid.n, grid.pitch, 300e-6);
  auto plain = propagate(f, grid, 0.01, false);
  auto padded = propagate(f, grid, 0.01, true);
  CHECK(max_abs_diff(plain, padded) < 1e-6);
  CHECK(std::abs(field_energy(padded) - field_energy(f)) / field_energy(f) < 1e-9);
}

TEST_CASE("concurrent propagation over distinct fields matches serial results") {
  Rng rng(21);
  constexpr int kJobs = 8;
  std::vector<ComplexField> inputs, serial(kJobs), parallel(kJobs);
  for (int i = 0; i < kJobs; ++i) inputs.push_back(random_unit_field(kSmall.n, rng));
  for (int i = 0; i < kJobs; ++i) serial[i] = propagate(inputs[i], kSmall, 0.01);

  std::vector<std::thread> pool;
  for (int i = 0; i < kJobs; ++i)
    pool.emplace_back([&, i] { parallel[i] = propagate(inputs[i], kSmall, 0.01); });
  for (auto& t : pool) t.join();

  for (int i = 0; i < kJobs; ++i) CHECK(max_abs_diff(serial[i], parallel[i]) == 0.0);
}
