#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "jetforge/calculus.hpp"
#include "jetforge/fft.hpp"
#include "jetforge/mollify.hpp"

using namespace jetforge;

namespace {

// Direct-summation DFT oracle (O(n^6), use on 8^3 only).
std::vector<Cplx> dft_oracle(const Grid3& g, const Real* in) {
  std::vector<Cplx> out(spec_size(g.n));
  for_each_mode(g, [&](std::size_t f, int kx, int ky, int kz) {
    Cplx acc(0, 0);
    for (int k = 0; k < g.n; ++k)
      for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) {
          Real phase = -(kx * g.coord(i) + ky * g.coord(j) + kz * g.coord(k));
          acc += in[g.idx(i, j, k)] * Cplx(std::cos(phase), std::sin(phase));
        }
    out[f] = acc;
  });
  return out;
}

Field random_band_field(const Grid3& g, Rank r, int kmax, uint64_t seed) {
  Rng rng(seed);
  struct Mode { int kx, ky, kz; Real a, b; };
  std::vector<std::vector<Mode>> modes(rank_comps(r));
  for (auto& mv : modes)
    for (int kx = -kmax; kx <= kmax; ++kx)
      for (int ky = -kmax; ky <= kmax; ++ky)
        for (int kz = 0; kz <= kmax; ++kz)
          mv.push_back({kx, ky, kz, rng.normal(), rng.normal()});
  return sample_field(g, r, [&](Real x, Real y, Real z, int c) {
    Real v = 0;
    for (const Mode& m : modes[c])
      v += m.a * std::cos(m.kx * x + m.ky * y + m.kz * z) +
           m.b * std::sin(m.kx * x + m.ky * y + m.kz * z);
    return v;
  });
}

}  // namespace

TEST_CASE("fft matches direct-summation DFT oracle on 8^3") {
  Grid3 g{8};
  Rng rng(42);
  Field f(g, Rank::scalar);
  for (auto& v : f.data) v = rng.normal();
  std::vector<Cplx> fast(spec_size(g.n));
  fft_forward(g, f.comp(0), fast.data());
  auto slow = dft_oracle(g, f.comp(0));
  Real err = 0;
  for (std::size_t i = 0; i < fast.size(); ++i)
    err = std::max(err, std::abs(fast[i] - slow[i]));
  CHECK(err < 1e-10);
  // round trip
  Field back(g, Rank::scalar);
  fft_backward(g, fast.data(), back.comp(0));
  for (std::size_t i = 0; i < g.n3(); ++i)
    CHECK(back.comp(0)[i] == doctest::Approx(f.comp(0)[i]).epsilon(1e-12));
}

TEST_CASE("parseval: grid L2 equals spectral L2") {
  Grid3 g{16};
  Field f = random_band_field(g, Rank::scalar, 3, 7);
  Real l2 = lp_norm(f, 2.0);
  std::vector<Cplx> s(spec_size(g.n));
  fft_forward(g, f.comp(0), s.data());
  Real acc = 0;
  for_each_mode(g, [&](std::size_t m, int kx, int, int) {
    Real w = (kx == 0 || kx == g.n / 2) ? 1.0 : 2.0;  // r2c folding weight
    acc += w * std::norm(s[m]);
  });
  Real spec_l2 = std::sqrt(acc / Real(g.n3()) / Real(g.n3()) * g.volume());
  CHECK(spec_l2 == doctest::Approx(l2).epsilon(1e-12));
}

TEST_CASE("trig derivative identities") {
  Grid3 g{32};
  Field f = sample_field(g, Rank::scalar, [](Real x, Real y, Real z, int) {
    return std::sin(3 * x) * std::cos(2 * y) + std::cos(z);
  });
  Field gx = grad(f);
  Field ref = sample_field(g, Rank::vector3, [](Real x, Real y, Real z, int c) {
    if (c == 0) return 3 * std::cos(3 * x) * std::cos(2 * y);
    if (c == 1) return -2 * std::sin(3 * x) * std::sin(2 * y);
    return -std::sin(z);
  });
  CHECK(lp_norm(sub(gx, ref), 2.0) < 1e-11);
  // laplacian
  Field lf = laplacian(f);
  Field lref = sample_field(g, Rank::scalar, [](Real x, Real y, Real z, int) {
    return -13 * std::sin(3 * x) * std::cos(2 * y) - std::cos(z);
  });
  CHECK(lp_norm(sub(lf, lref), 2.0) < 1e-10);
}

TEST_CASE("div grad = laplacian and curl of gradient vanishes") {
  Grid3 g{24};
  Field f = random_band_field(g, Rank::scalar, 3, 11);
  Field lhs = divergence(grad(f));
  Field rhs = laplacian(f);
  CHECK(lp_norm(sub(lhs, rhs), 2.0) < 1e-9 * (1 + lp_norm(rhs, 2.0)));
  CHECK(lp_norm(curl(grad(f)), 2.0) < 1e-9);
}

TEST_CASE("curl_curl = grad div - laplacian") {
  Grid3 g{24};
  Field u = random_band_field(g, Rank::vector3, 2, 13);
  Field lhs = curl_curl(u);
  Field rhs = sub(grad(divergence(u)), laplacian(u));
  CHECK(lp_norm(sub(lhs, rhs), 2.0) < 1e-9 * (1 + lp_norm(rhs, 2.0)));
  // and matches curl(curl(u))
  Field cc = curl(curl(u));
  CHECK(lp_norm(sub(lhs, cc), 2.0) < 1e-9 * (1 + lp_norm(cc, 2.0)));
}

TEST_CASE("dealiased product of exact trig modes is exact") {
  // product of modes k=2 and k=3 resolved on n=32: dealiasing must not
  // disturb it, and the pointwise product equals the analytic sum formula
  Grid3 g{32};
  Field a = sample_field(g, Rank::scalar, [](Real x, Real, Real, int) {
    return std::cos(2 * x);
  });
  Field b = sample_field(g, Rank::scalar, [](Real x, Real, Real, int) {
    return std::cos(3 * x);
  });
  Field p = mul_scalar(a, b, true);
  Field ref = sample_field(g, Rank::scalar, [](Real x, Real, Real, int) {
    return 0.5 * (std::cos(5 * x) + std::cos(x));
  });
  CHECK(lp_norm(sub(p, ref), 2.0) < 1e-12);
}

TEST_CASE("2/3 rule removes aliased content") {
  // k=7 squared on n=16 would alias; dealias first truncates k=7 > 16/3
  Grid3 g{16};
  Field a = sample_field(g, Rank::scalar, [](Real x, Real, Real, int) {
    return std::cos(7 * x);
  });
  Field p = mul_scalar(a, a, true);
  CHECK(lp_norm(p, 2.0) < 1e-12);  // truncated to zero before multiplying
}

TEST_CASE("lp norms against closed forms") {
  Grid3 g{64};
  Field f = sample_field(g, Rank::scalar, [](Real x, Real, Real, int) {
    return std::sin(x);
  });
  // ||sin||_2^2 over box = (2pi)^2 * pi ; equal-weight quadrature is exact
  CHECK(lp_norm(f, 2.0) ==
        doctest::Approx(std::sqrt(0.5 * g.volume())).epsilon(1e-13));
  // L4: mean of sin^4 = 3/8
  CHECK(lp_norm(f, 4.0) ==
        doctest::Approx(std::pow(0.375 * g.volume(), 0.25)).epsilon(1e-12));
  CHECK(linf_norm(f) == doctest::Approx(1.0).epsilon(1e-6));
  // W^{1,2} of sin x: ||f||_2 + ||cos||_2
  CHECK(wkq_norm(f, 1, 2.0) ==
        doctest::Approx(2 * std::sqrt(0.5 * g.volume())).epsilon(1e-12));
}

TEST_CASE("projections partition and are idempotent") {
  Grid3 g{32};
  Field f = random_band_field(g, Rank::scalar, 4, 17);
  Field lo = project_low(f, 3.0);
  Field hi = project_high(f, 3.0);
  CHECK(lp_norm(sub(f, add(lo, hi)), 2.0) < 1e-10);
  CHECK(lp_norm(sub(hi, project_high(hi, 3.0)), 2.0) < 1e-11);
  // mean-free projector kills constants
  Field c = sample_field(g, Rank::scalar, [](Real, Real, Real, int) {
    return 2.5;
  });
  CHECK(lp_norm(project_mean_free(c), 2.0) < 1e-12);
  // shells partition the mean-free part
  Field acc = Field::zero(g, Rank::scalar);
  for (int j = 0; j <= 5; ++j) axpy(acc, 1.0, lp_shell(f, j));
  CHECK(lp_norm(sub(acc, project_mean_free(f)), 2.0) < 1e-10);
}

TEST_CASE("inverse operators") {
  Grid3 g{32};
  Field f = project_mean_free(random_band_field(g, Rank::scalar, 3, 19));
  CHECK(lp_norm(sub(laplacian(inv_laplacian(f)), f), 2.0) <
        1e-9 * lp_norm(f, 2.0));
  // |nabla|^{-1} twice equals -invlap
  Field a = inv_grad_mag(inv_grad_mag(f));
  Field b = inv_laplacian(f);
  scale(b, -1.0);
  CHECK(lp_norm(sub(a, b), 2.0) < 1e-10 * lp_norm(f, 2.0));
}

TEST_CASE("leray projection is divergence-free and idempotent") {
  Grid3 g{32};
  Field u = random_band_field(g, Rank::vector3, 3, 23);
  Field pu = leray(u);
  CHECK(lp_norm(divergence(pu), 2.0) < 1e-9 * lp_norm(u, 2.0));
  CHECK(lp_norm(sub(leray(pu), pu), 2.0) < 1e-10 * lp_norm(u, 2.0));
  // gradient fields are annihilated (up to their mean)
  Field gf = grad(random_band_field(g, Rank::scalar, 3, 29));
  CHECK(lp_norm(project_mean_free(leray(gf)), 2.0) < 1e-9);
}

TEST_CASE("antidivergence inverts divergence and is trace-free") {
  Grid3 g{32};
  Field u = random_band_field(g, Rank::vector3, 3, 31);
  Field ru = antidivergence(u);
  CHECK(ru.trace_free);
  // trace vanishes pointwise
  Real tmax = 0;
  for (std::size_t i = 0; i < ru.n3(); ++i)
    tmax = std::max(tmax, std::abs(ru.comp(0)[i] + ru.comp(1)[i] + ru.comp(2)[i]));
  CHECK(tmax < 1e-10);
  Field dru = divergence(ru);
  Field target = project_mean_free(u);
  CHECK(lp_norm(sub(dru, target), 2.0) < 1e-10 * (1 + lp_norm(u, 2.0)));
}

TEST_CASE("div_outer matches divergence of assembled product") {
  Grid3 g{32};
  Field a = random_band_field(g, Rank::vector3, 2, 37);
  Field d1 = div_outer(a, a);
  Field d2 = divergence(outer_sym(a, false));
  CHECK(lp_norm(sub(d1, d2), 2.0) < 1e-9 * (1 + lp_norm(d2, 2.0)));
}

TEST_CASE("space mollification: mass preserved, smooth field nearly fixed") {
  Grid3 g{48};
  MollifierSpec spec{0.5, 3};
  Field f = sample_field(g, Rank::scalar, [](Real x, Real y, Real, int) {
    return 1.0 + std::sin(x) * std::cos(y);
  });
  MollifyReport rep;
  Field mf = mollify_space(f, spec, &rep);
  CHECK(!rep.space_underresolved);
  CHECK(integral(mf) == doctest::Approx(integral(f)).epsilon(1e-12));
  // low modes are damped by a factor close to 1
  CHECK(lp_norm(sub(mf, f), 2.0) < 0.1 * lp_norm(f, 2.0));
  // convolution against the k=0 constant is exact
  Field c = sample_field(g, Rank::scalar, [](Real, Real, Real, int) {
    return 3.0;
  });
  CHECK(lp_norm(sub(mollify_space(c, spec), c), 2.0) < 1e-12);
}

TEST_CASE("time mollification and 4th-order dt") {
  Grid3 g{4};
  TimeField u;
  u.t0 = 0;
  u.t1 = kTwoPi;
  int nt = 65;
  for (int i = 0; i < nt; ++i) {
    Real t = kTwoPi * i / (nt - 1);
    u.frames.push_back(sample_field(g, Rank::scalar,
                                    [t](Real, Real, Real, int) {
                                      return std::cos(t);
                                    }));
  }
  TimeField du = dt_fd(u);
  Real err = 0;
  for (int i = 0; i < nt; ++i) {
    Real t = u.time(i);
    err = std::max(err, std::abs(du.frames[i].comp(0)[0] + std::sin(t)));
  }
  CHECK(err < 5e-6);  // 4th order at dt ~ 0.1
  // reflective mollification keeps an even function even and preserves ends
  MollifierSpec spec{0.25, 3};
  MollifyReport rep;
  TimeField mu = mollify_time(u, spec, &rep);
  CHECK(!rep.time_underresolved);
  CHECK(mu.frames[0].comp(0)[0] == doctest::Approx(1.0).epsilon(1e-2));
}

TEST_CASE("zero-flagged fields flow through operators") {
  Grid3 g{16};
  Field z = Field::zero(g, Rank::vector3);
  CHECK(leray(z).is_zero());
  CHECK(antidivergence(z).is_zero());
  CHECK(div_outer(z, z).is_zero());
  CHECK(lp_norm(z, 2.0) == 0.0);
  Field f = random_band_field(g, Rank::vector3, 2, 41);
  CHECK(lp_norm(sub(add(f, z), f), 2.0) == 0.0);
}
