#include "fft_backend.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

namespace holograph::fft {

namespace {

// FFTW plan creation is not thread-safe; execution via the new-array
// interface is. Plans are cached per grid size and shared. FFTW_ESTIMATE is
// deliberate: measured plans depend on runtime timing and can change the
// algorithm (and hence low-order bits) between runs, which would break
// bit-reproducibility of training runs.
struct PlanPair {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

std::mutex plan_mutex;
std::map<std::uint32_t, PlanPair>& plan_cache() {
  static std::map<std::uint32_t, PlanPair> cache;
  return cache;
}

PlanPair get_plans(std::uint32_t n) {
  std::lock_guard<std::mutex> lock(plan_mutex);
  auto& cache = plan_cache();
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  const std::size_t count = static_cast<std::size_t>(n) * n;
  fftw_complex* scratch = fftw_alloc_complex(count);
  PlanPair p;
  p.fwd = fftw_plan_dft_2d(static_cast<int>(n), static_cast<int>(n), scratch, scratch,
                           FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  p.bwd = fftw_plan_dft_2d(static_cast<int>(n), static_cast<int>(n), scratch, scratch,
                           FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(scratch);
  cache.emplace(n, p);
  return p;
}

}  // namespace

void transform(std::complex<double>* data, std::uint32_t n, int sign) {
  PlanPair p = get_plans(n);
  auto* raw = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(sign < 0 ? p.fwd : p.bwd, raw, raw);
}

void spectral_apply(const std::complex<double>* in, const std::complex<double>* kernel,
                    std::complex<double>* out, std::uint32_t n) {
  const std::size_t count = static_cast<std::size_t>(n) * n;
  if (out != in) {
    for (std::size_t i = 0; i < count; ++i) out[i] = in[i];
  }
  transform(out, n, -1);
  const double norm = 1.0 / static_cast<double>(count);
  for (std::size_t i = 0; i < count; ++i) out[i] *= kernel[i] * norm;
  transform(out, n, +1);
}

}  // namespace holograph::fft
