#include "jetforge/mollify.hpp"

#include "jetforge/fft.hpp"

namespace jetforge {

namespace {

// Sampled space kernel, normalized so the grid sum times dx^3 equals 1,
// returned as its spectral multiplier (DFT of kernel * cell volume).
std::vector<Cplx> space_kernel_multiplier(const Grid3& g,
                                          const MollifierSpec& spec,
                                          MollifyReport* report) {
  Field ker(g, Rank::scalar);
  Real* d = ker.comp(0);
  Real sum = 0.0;
  for (int k = 0; k < g.n; ++k)
    for (int j = 0; j < g.n; ++j)
      for (int i = 0; i < g.n; ++i) {
        // distance to origin on the torus
        Real x = g.coord(i), y = g.coord(j), z = g.coord(k);
        if (x > g.box / 2) x -= g.box;
        if (y > g.box / 2) y -= g.box;
        if (z > g.box / 2) z -= g.box;
        Real r2 = (x * x + y * y + z * z) / (spec.ell * spec.ell);
        Real v = r2 < 1.0 ? std::pow(1.0 - r2, spec.order) : 0.0;
        d[g.idx(i, j, k)] = v;
        sum += v;
      }
  require(sum > 0.0, "mollify_space: kernel has no support on the grid");
  if (report) {
    report->kernel_radius_cells_space = int(spec.ell / g.dx());
    if (spec.ell < 2.0 * g.dx()) report->space_underresolved = true;
  }
  Real inv = 1.0 / sum;  // normalize discrete convolution weight to 1
  for (std::size_t i = 0; i < ker.n3(); ++i) d[i] *= inv;
  std::vector<Cplx> mult(spec_size(g.n));
  fft_forward(g, d, mult.data());
  return mult;
}

}  // namespace

Field mollify_space(const Field& f, const MollifierSpec& spec,
                    MollifyReport* report) {
  if (f.is_zero()) return f;
  auto mult = space_kernel_multiplier(f.grid, spec, report);
  auto specf = fft_forward_all(f);
  for (auto& s : specf)
    for (std::size_t m = 0; m < s.size(); ++m) s[m] *= mult[m];
  return fft_backward_all(f.grid, f.rank, specf, f.trace_free);
}

std::vector<Real> time_kernel(Real dt, const MollifierSpec& spec,
                              MollifyReport* report) {
  int radius = int(spec.ell / dt);
  if (report) {
    report->kernel_radius_cells_time = radius;
    if (spec.ell < 2.0 * dt) report->time_underresolved = true;
  }
  std::vector<Real> ker(2 * radius + 1, 0.0);
  Real sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    Real s = (i * dt) / spec.ell;
    Real v = s * s < 1.0 ? std::pow(1.0 - s * s, spec.order) : 0.0;
    ker[i + radius] = v;
    sum += v;
  }
  for (Real& v : ker) v /= sum;
  return ker;
}

TimeField mollify_time(const TimeField& u, const MollifierSpec& spec,
                       MollifyReport* report) {
  auto ker = time_kernel(u.dt(), spec, report);
  int radius = (int(ker.size()) - 1) / 2;
  TimeField out;
  out.t0 = u.t0;
  out.t1 = u.t1;
  out.frames.resize(u.nt());
  for (int i = 0; i < u.nt(); ++i) {
    Field acc = Field::zero(u.frames[0].grid, u.frames[0].rank,
                            u.frames[0].trace_free);
    bool all_zero = true;
    for (int s = -radius; s <= radius; ++s) {
      const Field& fr = u.frames[u.reflect(i + s)];
      if (!fr.is_zero()) all_zero = false;
      axpy(acc, ker[s + radius], fr);
    }
    out.frames[i] = all_zero
                        ? Field::zero(u.frames[0].grid, u.frames[0].rank,
                                      u.frames[0].trace_free)
                        : std::move(acc);
  }
  return out;
}

TimeField mollify(const TimeField& u, const MollifierSpec& spec,
                  MollifyReport* report) {
  TimeField sp;
  sp.t0 = u.t0;
  sp.t1 = u.t1;
  sp.frames.reserve(u.nt());
  for (const Field& f : u.frames)
    sp.frames.push_back(mollify_space(f, spec, report));
  return mollify_time(sp, spec, report);
}

TimeField dt_fd(const TimeField& u) {
  require(u.nt() >= 5, "dt_fd: need at least 5 time nodes");
  TimeField out;
  out.t0 = u.t0;
  out.t1 = u.t1;
  out.frames.resize(u.nt());
  const Real h = u.dt();
  // f' = (-f(+2) + 8 f(+1) - 8 f(-1) + f(-2)) / (12 h), reflective ends
  for (int i = 0; i < u.nt(); ++i) {
    Field acc = Field::zero(u.frames[0].grid, u.frames[0].rank,
                            u.frames[0].trace_free);
    axpy(acc, -1.0 / (12 * h), u.frames[u.reflect(i + 2)]);
    axpy(acc, 8.0 / (12 * h), u.frames[u.reflect(i + 1)]);
    axpy(acc, -8.0 / (12 * h), u.frames[u.reflect(i - 1)]);
    axpy(acc, 1.0 / (12 * h), u.frames[u.reflect(i - 2)]);
    out.frames[i] = std::move(acc);
  }
  return out;
}

std::vector<Real> dt_fd_series(const std::vector<Real>& v, Real dt) {
  int n = int(v.size());
  require(n >= 5, "dt_fd_series: need at least 5 nodes");
  auto refl = [n](int i) {
    int m = n - 1;
    i = std::abs(i);
    i %= 2 * m;
    return i <= m ? i : 2 * m - i;
  };
  std::vector<Real> out(n);
  for (int i = 0; i < n; ++i)
    out[i] = (-v[refl(i + 2)] + 8 * v[refl(i + 1)] - 8 * v[refl(i - 1)] +
              v[refl(i - 2)]) /
             (12 * dt);
  return out;
}

Real ct_lq_norm(const TimeField& u, Real q) {
  Real m = 0.0;
  for (const Field& f : u.frames) m = std::max(m, lp_norm(f, q));
  return m;
}

}  // namespace jetforge
