#include "jetforge/field.hpp"

#include <cstdlib>
#include <thread>

namespace jetforge {

int thread_budget() {
  static int budget = [] {
    if (const char* env = std::getenv("JETFORGE_THREADS")) {
      int v = std::atoi(env);
      if (v > 0) return v;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? int(hc) : 1;
  }();
  return budget;
}

Rng::Rng(uint64_t seed) {
  // splitmix64 expansion of the seed into xoshiro state
  uint64_t z = seed;
  for (int i = 0; i < 4; ++i) {
    z += 0x9e3779b97f4a7c15ull;
    uint64_t t = z;
    t = (t ^ (t >> 30)) * 0xbf58476d1ce4e5b9ull;
    t = (t ^ (t >> 27)) * 0x94d049bb133111ebull;
    s_[i] = t ^ (t >> 31);
  }
}

static inline uint64_t rotl(uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

uint64_t Rng::next_u64() {
  uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

Real Rng::uniform() { return Real(next_u64() >> 11) * 0x1.0p-53; }
Real Rng::uniform(Real lo, Real hi) { return lo + (hi - lo) * uniform(); }

Real Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  Real u1 = 0.0, u2 = 0.0;
  do { u1 = uniform(); } while (u1 <= 1e-300);
  u2 = uniform();
  Real rad = std::sqrt(-2.0 * std::log(u1));
  spare_ = rad * std::sin(kTwoPi * u2);
  have_spare_ = true;
  return rad * std::cos(kTwoPi * u2);
}

Real fit_slope(const std::vector<Real>& x, const std::vector<Real>& y) {
  require(x.size() == y.size() && x.size() >= 2, "fit_slope: need >= 2 points");
  Real mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) { mx += x[i]; my += y[i]; }
  mx /= x.size();
  my /= y.size();
  Real num = 0, den = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (x[i] - mx) * (y[i] - my);
    den += (x[i] - mx) * (x[i] - mx);
  }
  return num / den;
}

Field sample_field(const Grid3& g, Rank r,
                   const std::function<Real(Real, Real, Real, int)>& f) {
  Field out(g, r);
  for (int c = 0; c < out.comps(); ++c) {
    Real* d = out.comp(c);
    for (int k = 0; k < g.n; ++k)
      for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i)
          d[g.idx(i, j, k)] = f(g.coord(i), g.coord(j), g.coord(k), c);
  }
  return out;
}

void axpy(Field& y, Real a, const Field& x) {
  if (x.is_zero() || a == 0.0) return;
  require(y.grid == x.grid && y.rank == x.rank, "axpy: shape mismatch");
  y.materialize();
  for (std::size_t i = 0; i < y.data.size(); ++i) y.data[i] += a * x.data[i];
}

Field add(const Field& a, const Field& b) {
  Field out = a;
  axpy(out, 1.0, b);
  return out;
}

Field sub(const Field& a, const Field& b) {
  Field out = a;
  axpy(out, -1.0, b);
  return out;
}

void scale(Field& f, Real a) {
  for (Real& v : f.data) v *= a;
}

std::vector<Real> field_mean(const Field& f) {
  std::vector<Real> m(f.comps(), 0.0);
  if (f.is_zero()) return m;
  for (int c = 0; c < f.comps(); ++c) {
    const Real* d = f.comp(c);
    Real s = 0.0;
    for (std::size_t i = 0; i < f.n3(); ++i) s += d[i];
    m[c] = s / Real(f.n3());
  }
  return m;
}

}  // namespace jetforge
