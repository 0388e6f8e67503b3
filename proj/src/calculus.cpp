#include "jetforge/calculus.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <map>

#include "jetforge/fft.hpp"

namespace jetforge {

namespace {

// ik multiplier along one axis; Nyquist plane zeroed to keep odd-order
// derivatives real-symmetric.
inline Real wavenum(int k, int n) { return (2 * std::abs(k) == n) ? 0.0 : Real(k); }

std::vector<Cplx> deriv_spec(const Grid3& g, const std::vector<Cplx>& in,
                             int axis) {
  std::vector<Cplx> out(in.size());
  for_each_mode(g, [&](std::size_t f, int kx, int ky, int kz) {
    Real k = axis == 0 ? wavenum(kx, g.n)
                       : (axis == 1 ? wavenum(ky, g.n) : wavenum(kz, g.n));
    out[f] = Cplx(0.0, k) * in[f];
  });
  return out;
}

}  // namespace

Field partial(const Field& f, int axis) {
  if (f.is_zero()) return Field::zero(f.grid, f.rank, f.trace_free);
  auto spec = fft_forward_all(f);
  for (auto& s : spec) s = deriv_spec(f.grid, s, axis);
  return fft_backward_all(f.grid, f.rank, spec, f.trace_free);
}

Field grad(const Field& f) {
  require(f.rank == Rank::scalar, "grad: scalar input expected");
  if (f.is_zero()) return Field::zero(f.grid, Rank::vector3);
  std::vector<Cplx> s(spec_size(f.grid.n));
  fft_forward(f.grid, f.comp(0), s.data());
  Field out(f.grid, Rank::vector3);
  for (int a = 0; a < 3; ++a) {
    auto d = deriv_spec(f.grid, s, a);
    fft_backward(f.grid, d.data(), out.comp(a));
  }
  return out;
}

Field divergence(const Field& f) {
  if (f.rank == Rank::vector3) {
    if (f.is_zero()) return Field::zero(f.grid, Rank::scalar);
    auto spec = fft_forward_all(f);
    std::vector<Cplx> acc(spec_size(f.grid.n), Cplx(0, 0));
    for (int a = 0; a < 3; ++a) {
      auto d = deriv_spec(f.grid, spec[a], a);
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += d[i];
    }
    Field out(f.grid, Rank::scalar);
    fft_backward(f.grid, acc.data(), out.comp(0));
    return out;
  }
  require(f.rank == Rank::symtensor3, "divergence: vector3 or symtensor3");
  if (f.is_zero()) return Field::zero(f.grid, Rank::vector3);
  auto spec = fft_forward_all(f);
  Field out(f.grid, Rank::vector3);
  for (int i = 0; i < 3; ++i) {
    std::vector<Cplx> acc(spec_size(f.grid.n), Cplx(0, 0));
    for (int j = 0; j < 3; ++j) {
      auto d = deriv_spec(f.grid, spec[sym_index(i, j)], j);
      for (std::size_t m = 0; m < acc.size(); ++m) acc[m] += d[m];
    }
    fft_backward(f.grid, acc.data(), out.comp(i));
  }
  return out;
}

Field curl(const Field& f) {
  require(f.rank == Rank::vector3, "curl: vector3 input expected");
  if (f.is_zero()) return Field::zero(f.grid, Rank::vector3);
  auto spec = fft_forward_all(f);
  Field out(f.grid, Rank::vector3);
  const int perm[3][2] = {{1, 2}, {2, 0}, {0, 1}};  // (curl)_i = d_j f_k - d_k f_j
  for (int i = 0; i < 3; ++i) {
    int j = perm[i][0], k = perm[i][1];
    auto a = deriv_spec(f.grid, spec[k], j);
    auto b = deriv_spec(f.grid, spec[j], k);
    for (std::size_t m = 0; m < a.size(); ++m) a[m] -= b[m];
    fft_backward(f.grid, a.data(), out.comp(i));
  }
  return out;
}

Field laplacian(const Field& f) {
  if (f.is_zero()) return Field::zero(f.grid, f.rank, f.trace_free);
  auto spec = fft_forward_all(f);
  for (auto& s : spec) {
    for_each_mode(f.grid, [&](std::size_t m, int kx, int ky, int kz) {
      s[m] *= -Real(kx * kx + ky * ky + kz * kz);
    });
  }
  return fft_backward_all(f.grid, f.rank, spec, f.trace_free);
}

Field curl_curl(const Field& f) {
  require(f.rank == Rank::vector3, "curl_curl: vector3 input expected");
  if (f.is_zero()) return Field::zero(f.grid, Rank::vector3);
  auto spec = fft_forward_all(f);
  // curl curl u = k (k.u) + |k|^2 u in spectral variables (with i^2 = -1 signs
  // worked through: hat(curlcurl u) = -k (k.uhat) + |k|^2 uhat ... see below)
  // hat(grad div u)_i = (i k_i)(i k_j) u_j = -k_i k_j u_j
  // hat(-lap u)_i = |k|^2 u_i ;  curlcurl = grad div - lap
  Field out(f.grid, Rank::vector3);
  std::vector<std::vector<Cplx>> os(3);
  for (int i = 0; i < 3; ++i) os[i].resize(spec_size(f.grid.n));
  for_each_mode(f.grid, [&](std::size_t m, int kx, int ky, int kz) {
    Real k[3] = {wavenum(kx, f.grid.n), wavenum(ky, f.grid.n),
                 wavenum(kz, f.grid.n)};
    Real k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
    Cplx kdotu = k[0] * spec[0][m] + k[1] * spec[1][m] + k[2] * spec[2][m];
    for (int i = 0; i < 3; ++i) os[i][m] = k2 * spec[i][m] - k[i] * kdotu;
  });
  for (int i = 0; i < 3; ++i) fft_backward(f.grid, os[i].data(), out.comp(i));
  return out;
}

Field div_outer(const Field& a, const Field& b) {
  require(a.rank == Rank::vector3 && b.rank == Rank::vector3,
          "div_outer: vector3 inputs expected");
  require(a.grid == b.grid, "div_outer: grid mismatch");
  if (a.is_zero() || b.is_zero()) return Field::zero(a.grid, Rank::vector3);
  Field out(a.grid, Rank::vector3);
  std::vector<Real> prod(a.n3());
  std::vector<Cplx> ps(spec_size(a.grid.n));
  std::vector<std::vector<Cplx>> acc(3);
  for (int i = 0; i < 3; ++i) acc[i].assign(spec_size(a.grid.n), Cplx(0, 0));
  for (int i = 0; i < 3; ++i) {
    const Real* ai = a.comp(i);
    for (int j = 0; j < 3; ++j) {
      const Real* bj = b.comp(j);
      for (std::size_t m = 0; m < a.n3(); ++m) prod[m] = ai[m] * bj[m];
      fft_forward(a.grid, prod.data(), ps.data());
      auto d = deriv_spec(a.grid, ps, j);
      for (std::size_t m = 0; m < d.size(); ++m) acc[i][m] += d[m];
    }
  }
  for (int i = 0; i < 3; ++i) fft_backward(a.grid, acc[i].data(), out.comp(i));
  return out;
}

Field dealias_23(const Field& f) {
  if (f.is_zero()) return f;
  const int kc = f.grid.n / 3;
  auto spec = fft_forward_all(f);
  for (auto& s : spec) {
    for_each_mode(f.grid, [&](std::size_t m, int kx, int ky, int kz) {
      if (std::abs(kx) > kc || std::abs(ky) > kc || std::abs(kz) > kc)
        s[m] = Cplx(0, 0);
    });
  }
  return fft_backward_all(f.grid, f.rank, spec, f.trace_free);
}

Field mul_scalar(const Field& s, const Field& f, bool dealias) {
  require(s.rank == Rank::scalar, "mul_scalar: first arg must be scalar");
  require(s.grid == f.grid, "mul_scalar: grid mismatch");
  if (s.is_zero() || f.is_zero())
    return Field::zero(f.grid, f.rank, f.trace_free);
  Field a = dealias ? dealias_23(s) : s;
  Field b = dealias ? dealias_23(f) : f;
  Field out(f.grid, f.rank, f.trace_free);
  const Real* sd = a.comp(0);
  for (int c = 0; c < f.comps(); ++c) {
    const Real* fd = b.comp(c);
    Real* od = out.comp(c);
    for (std::size_t i = 0; i < f.n3(); ++i) od[i] = sd[i] * fd[i];
  }
  return out;
}

Field outer_sym(const Field& u, bool dealias) {
  require(u.rank == Rank::vector3, "outer_sym: vector3 input expected");
  if (u.is_zero()) return Field::zero(u.grid, Rank::symtensor3);
  Field a = dealias ? dealias_23(u) : u;
  Field out(u.grid, Rank::symtensor3);
  const int pairs[6][2] = {{0, 0}, {1, 1}, {2, 2}, {0, 1}, {0, 2}, {1, 2}};
  for (int c = 0; c < 6; ++c) {
    const Real* x = a.comp(pairs[c][0]);
    const Real* y = a.comp(pairs[c][1]);
    Real* od = out.comp(c);
    for (std::size_t i = 0; i < u.n3(); ++i) od[i] = x[i] * y[i];
  }
  return out;
}

Field dot_self(const Field& u, bool dealias) {
  require(u.rank == Rank::vector3, "dot_self: vector3 input expected");
  if (u.is_zero()) return Field::zero(u.grid, Rank::scalar);
  Field a = dealias ? dealias_23(u) : u;
  Field out(u.grid, Rank::scalar);
  Real* od = out.comp(0);
  for (int c = 0; c < 3; ++c) {
    const Real* x = a.comp(c);
    for (std::size_t i = 0; i < u.n3(); ++i) od[i] += x[i] * x[i];
  }
  return out;
}

namespace {

inline Real point_mag2(const Field& f, std::size_t i) {
  switch (f.rank) {
    case Rank::scalar: {
      Real v = f.comp(0)[i];
      return v * v;
    }
    case Rank::vector3: {
      Real s = 0;
      for (int c = 0; c < 3; ++c) { Real v = f.comp(c)[i]; s += v * v; }
      return s;
    }
    case Rank::symtensor3: {
      Real s = 0;
      for (int c = 0; c < 3; ++c) { Real v = f.comp(c)[i]; s += v * v; }
      for (int c = 3; c < 6; ++c) { Real v = f.comp(c)[i]; s += 2 * v * v; }
      return s;
    }
  }
  return 0;
}

}  // namespace

Real lp_norm(const Field& f, Real p) {
  require(p >= 1.0, "lp_norm: p >= 1 required");
  if (f.is_zero()) return 0.0;
  Real acc = 0.0;
  for (std::size_t i = 0; i < f.n3(); ++i)
    acc += std::pow(point_mag2(f, i), 0.5 * p);
  return std::pow(acc * f.grid.cell_volume(), 1.0 / p);
}

Real linf_norm(const Field& f) {
  if (f.is_zero()) return 0.0;
  Real m = 0.0;
  for (std::size_t i = 0; i < f.n3(); ++i)
    m = std::max(m, point_mag2(f, i));
  return std::sqrt(m);
}

Real l2_inner(const Field& a, const Field& b) {
  require(a.grid == b.grid && a.rank == b.rank, "l2_inner: shape mismatch");
  if (a.is_zero() || b.is_zero()) return 0.0;
  Real acc = 0.0;
  for (int c = 0; c < a.comps(); ++c) {
    const Real* x = a.comp(c);
    const Real* y = b.comp(c);
    Real w = (a.rank == Rank::symtensor3 && c >= 3) ? 2.0 : 1.0;
    for (std::size_t i = 0; i < a.n3(); ++i) acc += w * x[i] * y[i];
  }
  return acc * a.grid.cell_volume();
}

Real integral(const Field& f, int comp) {
  if (f.is_zero()) return 0.0;
  const Real* d = f.comp(comp);
  Real acc = 0.0;
  for (std::size_t i = 0; i < f.n3(); ++i) acc += d[i];
  return acc * f.grid.cell_volume();
}

Real wkq_norm(const Field& f, int k, Real q) {
  if (f.is_zero()) return 0.0;
  Real total = lp_norm(f, q);
  // order-m derivative stack: multi-index alpha with multinomial weights,
  // magnitude = sqrt(sum_alpha mult(alpha) |d^alpha f|^2) pointwise
  std::map<std::array<int, 3>, std::pair<Real, Field>> level;
  level[{0, 0, 0}] = {1.0, f};
  for (int m = 1; m <= k; ++m) {
    std::map<std::array<int, 3>, std::pair<Real, Field>> next;
    for (auto& [alpha, wf] : level) {
      for (int a = 0; a < 3; ++a) {
        auto beta = alpha;
        beta[a] += 1;
        auto it = next.find(beta);
        if (it == next.end())
          next.emplace(beta, std::make_pair(0.0, partial(wf.second, a)));
      }
    }
    // multinomial coefficient m!/(b0!b1!b2!)
    for (auto& [beta, wf] : next) {
      Real c = 1.0;
      for (int t = 1; t <= m; ++t) c *= t;
      for (int a = 0; a < 3; ++a)
        for (int t = 1; t <= beta[a]; ++t) c /= t;
      wf.first = c;
    }
    // L^q of the combined magnitude
    const Grid3& g = f.grid;
    Real acc = 0.0;
    for (std::size_t i = 0; i < f.n3(); ++i) {
      Real s = 0.0;
      for (auto& [beta, wf] : next) s += wf.first * point_mag2(wf.second, i);
      acc += std::pow(s, 0.5 * q);
    }
    total += std::pow(acc * g.cell_volume(), 1.0 / q);
    level = std::move(next);
  }
  return total;
}

Real c0_norm(const Field& f) { return linf_norm(f); }

Real c1_norm(const Field& f) {
  Real total = linf_norm(f);
  if (f.is_zero()) return 0.0;
  std::vector<Field> d;
  for (int a = 0; a < 3; ++a) d.push_back(partial(f, a));
  Real m = 0.0;
  for (std::size_t i = 0; i < f.n3(); ++i) {
    Real s = 0.0;
    for (int a = 0; a < 3; ++a) s += point_mag2(d[a], i);
    m = std::max(m, s);
  }
  return total + std::sqrt(m);
}

namespace {

Field apply_multiplier(const Field& f,
                       const std::function<Real(Real)>& mult_of_kmag,
                       bool keep_mean) {
  if (f.is_zero()) return Field::zero(f.grid, f.rank, f.trace_free);
  auto spec = fft_forward_all(f);
  for (auto& s : spec) {
    for_each_mode(f.grid, [&](std::size_t m, int kx, int ky, int kz) {
      Real kmag = std::sqrt(Real(kx * kx + ky * ky + kz * kz));
      if (kmag == 0.0) {
        if (!keep_mean) s[m] = Cplx(0, 0);
        return;
      }
      s[m] *= mult_of_kmag(kmag);
    });
  }
  return fft_backward_all(f.grid, f.rank, spec, f.trace_free);
}

}  // namespace

Field project_mean_free(const Field& f) {
  return apply_multiplier(f, [](Real) { return 1.0; }, false);
}

Field project_low(const Field& f, Real kappa) {
  return apply_multiplier(
      f, [kappa](Real k) { return k < kappa ? 1.0 : 0.0; }, true);
}

Field project_high(const Field& f, Real kappa) {
  return apply_multiplier(
      f, [kappa](Real k) { return k >= kappa ? 1.0 : 0.0; }, false);
}

Field lp_shell(const Field& f, int j) {
  require(j >= 0, "lp_shell: j >= 0");
  Real lo = std::pow(2.0, j), hi = std::pow(2.0, j + 1);
  return apply_multiplier(
      f, [lo, hi](Real k) { return (k >= lo && k < hi) ? 1.0 : 0.0; }, false);
}

namespace {

// Multiplier on the Nyquist-zeroed wavenumbers used by the derivative
// operators, so these inverses invert div/grad compositions exactly;
// derivative-null modes (other than the mean, which is dropped) are
// annihilated to stay inside the operators' range.
Field apply_deriv_inverse(const Field& f,
                          const std::function<Real(Real)>& mult_of_kmag) {
  if (f.is_zero()) return Field::zero(f.grid, f.rank, f.trace_free);
  auto spec = fft_forward_all(f);
  for (auto& s : spec) {
    for_each_mode(f.grid, [&](std::size_t m, int kx, int ky, int kz) {
      Real a = wavenum(kx, f.grid.n), b = wavenum(ky, f.grid.n),
           c = wavenum(kz, f.grid.n);
      Real kmag = std::sqrt(a * a + b * b + c * c);
      s[m] = kmag == 0.0 ? Cplx(0, 0) : s[m] * mult_of_kmag(kmag);
    });
  }
  return fft_backward_all(f.grid, f.rank, spec, f.trace_free);
}

}  // namespace

Field inv_laplacian(const Field& f) {
  return apply_deriv_inverse(f, [](Real k) { return -1.0 / (k * k); });
}

Field inv_grad_mag(const Field& f) {
  return apply_deriv_inverse(f, [](Real k) { return 1.0 / k; });
}

Field leray(const Field& u) {
  require(u.rank == Rank::vector3, "leray: vector3 input expected");
  if (u.is_zero()) return Field::zero(u.grid, Rank::vector3);
  auto spec = fft_forward_all(u);
  std::vector<std::vector<Cplx>> os(3);
  for (int i = 0; i < 3; ++i) os[i].resize(spec_size(u.grid.n));
  for_each_mode(u.grid, [&](std::size_t m, int kx, int ky, int kz) {
    // same Nyquist-zeroed wavenumbers as the derivative operators, so that
    // divergence(leray(u)) vanishes identically on even grids
    Real k[3] = {wavenum(kx, u.grid.n), wavenum(ky, u.grid.n),
                 wavenum(kz, u.grid.n)};
    Real k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
    if (k2 == 0.0) {
      // keep the true mean; drop other derivative-null (Nyquist) modes so the
      // output lives in the range of antidivergence
      if (kx == 0 && ky == 0 && kz == 0)
        for (int i = 0; i < 3; ++i) os[i][m] = spec[i][m];
      return;
    }
    Cplx kdotu = k[0] * spec[0][m] + k[1] * spec[1][m] + k[2] * spec[2][m];
    for (int i = 0; i < 3; ++i) os[i][m] = spec[i][m] - k[i] * kdotu / k2;
  });
  Field out(u.grid, Rank::vector3);
  for (int i = 0; i < 3; ++i) fft_backward(u.grid, os[i].data(), out.comp(i));
  return out;
}

Field antidivergence(const Field& u) {
  require(u.rank == Rank::vector3, "antidivergence: vector3 input expected");
  if (u.is_zero()) return Field::zero(u.grid, Rank::symtensor3, true);
  auto spec = fft_forward_all(u);
  const Grid3& g = u.grid;
  std::vector<std::vector<Cplx>> os(6);
  for (int c = 0; c < 6; ++c) os[c].assign(spec_size(g.n), Cplx(0, 0));
  const int pairs[6][2] = {{0, 0}, {1, 1}, {2, 2}, {0, 1}, {0, 2}, {1, 2}};
  for_each_mode(g, [&](std::size_t m, int kxi, int kyi, int kzi) {
    Real k[3] = {wavenum(kxi, g.n), wavenum(kyi, g.n), wavenum(kzi, g.n)};
    Real k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
    if (k2 == 0.0) return;  // mean dropped
    Cplx v[3];              // v = invlap(u - mean u)
    for (int i = 0; i < 3; ++i) v[i] = -spec[i][m] / k2;
    Cplx kdotv = k[0] * v[0] + k[1] * v[1] + k[2] * v[2];
    Cplx hv[3];             // P_H v
    for (int i = 0; i < 3; ++i) hv[i] = v[i] - k[i] * kdotv / k2;
    Cplx divv = Cplx(0, 1) * kdotv;
    for (int c = 0; c < 6; ++c) {
      int i = pairs[c][0], j = pairs[c][1];
      Cplx dihj = Cplx(0, k[i]) * hv[j], djhi = Cplx(0, k[j]) * hv[i];
      Cplx divj = Cplx(0, k[i]) * v[j], djvi = Cplx(0, k[j]) * v[i];
      os[c][m] = 0.25 * (dihj + djhi) + 0.75 * (divj + djvi);
      if (i == j) os[c][m] -= 0.5 * divv;
    }
  });
  return fft_backward_all(g, Rank::symtensor3, os, true);
}

}  // namespace jetforge
