#include "jetforge/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <mutex>

namespace jetforge {

namespace {

// One cached plan pair per grid size, with its own aligned buffers.
struct PlanEntry {
  int n = 0;
  double* real = nullptr;
  fftw_complex* cplx = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

std::mutex g_fft_mutex;

PlanEntry& plan_for(int n) {
  static std::map<int, PlanEntry> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  PlanEntry e;
  e.n = n;
  std::size_t nreal = std::size_t(n) * n * n;
  std::size_t ncplx = spec_size(n);
  e.real = fftw_alloc_real(nreal);
  e.cplx = fftw_alloc_complex(ncplx);
  // FFTW_MEASURE planning cost is paid once per size.
  e.fwd = fftw_plan_dft_r2c_3d(n, n, n, e.real, e.cplx, FFTW_MEASURE);
  e.bwd = fftw_plan_dft_c2r_3d(n, n, n, e.cplx, e.real, FFTW_MEASURE);
  require(e.fwd && e.bwd, "fftw planning failed");
  return cache.emplace(n, e).first->second;
}

}  // namespace

void fft_forward(const Grid3& g, const Real* in, Cplx* out) {
  std::lock_guard<std::mutex> lock(g_fft_mutex);
  PlanEntry& e = plan_for(g.n);
  std::memcpy(e.real, in, sizeof(Real) * g.n3());
  fftw_execute(e.fwd);
  std::memcpy(out, e.cplx, sizeof(Cplx) * spec_size(g.n));
}

void fft_backward(const Grid3& g, const Cplx* in, Real* out) {
  std::lock_guard<std::mutex> lock(g_fft_mutex);
  PlanEntry& e = plan_for(g.n);
  std::memcpy(e.cplx, in, sizeof(Cplx) * spec_size(g.n));
  fftw_execute(e.bwd);  // c2r destroys input buffer copy, which is fine
  const Real scale = 1.0 / Real(g.n3());
  for (std::size_t i = 0; i < g.n3(); ++i) out[i] = e.real[i] * scale;
}

std::vector<std::vector<Cplx>> fft_forward_all(const Field& f) {
  std::vector<std::vector<Cplx>> spec(f.comps());
  for (int c = 0; c < f.comps(); ++c) {
    spec[c].resize(spec_size(f.grid.n));
    if (f.is_zero()) continue;
    fft_forward(f.grid, f.comp(c), spec[c].data());
  }
  return spec;
}

Field fft_backward_all(const Grid3& g, Rank r,
                       const std::vector<std::vector<Cplx>>& spec,
                       bool trace_free) {
  Field out(g, r, trace_free);
  require(int(spec.size()) == out.comps(), "fft_backward_all: comp mismatch");
  for (int c = 0; c < out.comps(); ++c)
    fft_backward(g, spec[c].data(), out.comp(c));
  return out;
}

}  // namespace jetforge
