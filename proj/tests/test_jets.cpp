#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "jetforge/calculus.hpp"
#include "jetforge/jets.hpp"

using namespace jetforge;

namespace {

// axis-aligned orthonormal frame (denominator 1) so that omega = 1 already
// gives integer phase gradients and a genuinely periodic sampled field
DirectionFrame axis_frame() {
  DirectionFrame f;
  f.zeta = RVec3{Rat(0), Rat(0), Rat(1)};
  f.a = RVec3{Rat(1), Rat(0), Rat(0)};
  f.c = RVec3{Rat(0), Rat(1), Rat(0)};
  f.den = 1;
  return f;
}

// resolved reference configuration: one tube, unit oscillation frequency
JetParams resolved_params(double q = 2.5) {
  JetParams jp;
  jp.lambda = 1.0 / 0.45;
  jp.sigma = 0.45;
  jp.r = 0.6;
  jp.mu = 4.0;
  jp.n_lambda = 1;
  jp.q = q;
  return jp;
}

Jet make_resolved_jet(const Profiles& prof) {
  return Jet(axis_frame(), resolved_params(prof.p1.q), prof, {0.9, 1.7, 0.3});
}

}  // namespace

TEST_CASE("jet L^q norm is exactly one; grid norm agrees when resolved") {
  Profiles prof = make_profiles(2.5);
  Jet jet = make_resolved_jet(prof);
  CHECK(jet_lp_norm(jet, 2.5) == doctest::Approx(1.0).epsilon(1e-10));

  Grid3 g{128};
  JetFields jf = build_jet(jet, g, 0.13);
  CHECK(lp_norm(jf.W, 2.5) == doctest::Approx(1.0).epsilon(1e-3));
  auto mean = field_mean(jf.W);
  for (int c = 0; c < 3; ++c) CHECK(std::abs(mean[c]) < 1e-10);
}

TEST_CASE("jet is (2pi/omega)-periodic along every frame axis") {
  Profiles prof = make_profiles(2.5);
  Jet jet = make_resolved_jet(prof);
  const double period = kTwoPi / jet.omega();
  const double t = 0.37;
  Rng rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    std::array<double, 3> x{rng.uniform(0, kTwoPi), rng.uniform(0, kTwoPi),
                            rng.uniform(0, kTwoPi)};
    auto w0 = jet.W(x, t);
    for (const auto& axis : {jet.zeta(), jet.axis_a(), jet.axis_c()}) {
      std::array<double, 3> y{x[0] + period * axis[0], x[1] + period * axis[1],
                              x[2] + period * axis[2]};
      auto w1 = jet.W(y, t);
      for (int c = 0; c < 3; ++c) CHECK(std::abs(w1[c] - w0[c]) < 1e-10);
    }
  }
}

TEST_CASE("second moment matches the concentration power law") {
  Profiles prof = make_profiles(2.5);
  for (double sigma : {0.25, 0.125}) {
    JetParams jp = resolved_params();
    jp.sigma = sigma;
    jp.lambda = 1.0 / sigma;  // keeps omega = 1
    DirectionSet s = make_direction_set();
    Jet jet(s.family[0][2], jp, prof, {0, 0, 0});
    auto m = jet_second_moment(jet);
    const double pref = prof.p2.c_q * prof.p1.c_q_star *
                        std::pow(sigma * sigma * jp.r, (jp.q - 2.0) / jp.q);
    const auto& z = jet.zeta();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        CHECK(m[i * 3 + j] ==
              doctest::Approx(pref * z[i] * z[j]).epsilon(1e-3));
  }
}

TEST_CASE("analytic time derivative matches Richardson finite differences") {
  Profiles prof = make_profiles(2.5);
  Jet jet = make_resolved_jet(prof);
  const double t = 0.21, h = 1e-4;
  const JetParams& jp = jet.params();
  const auto& z = jet.zeta();
  const auto& a = jet.axis_a();
  const auto& c = jet.axis_c();
  const std::array<double, 3> alpha{0.9, 1.7, 0.3};
  Rng rng(7);
  int tested = 0;
  for (int trial = 0; trial < 40 && tested < 20; ++trial) {
    // place the point inside the tube: pick target phases in the support
    const double u0 = rng.uniform(-0.8 * jp.r, 0.8 * jp.r);
    const double v0 = rng.uniform(-0.5 * jp.sigma, 0.5 * jp.sigma);
    const double w0 = rng.uniform(-0.5 * jp.sigma, 0.5 * jp.sigma);
    const double az = alpha[0] * z[0] + alpha[1] * z[1] + alpha[2] * z[2];
    const double e = u0 / jet.omega() - jp.mu * t - az;
    std::array<double, 3> x;
    for (int d = 0; d < 3; ++d)
      x[d] = alpha[d] + e * z[d] + (v0 / jet.omega()) * a[d] +
             (w0 / jet.omega()) * c[d];
    auto d1 = jet.deriv(x, t, 1, 0);
    if (std::abs(d1[0]) + std::abs(d1[1]) + std::abs(d1[2]) < 1e-3) continue;
    ++tested;
    // 4th-order Richardson stencil
    for (int c = 0; c < 3; ++c) {
      double f1 = jet.W({x[0], x[1], x[2]}, t + h)[c];
      double f_1 = jet.W(x, t - h)[c];
      double f2 = jet.W(x, t + 2 * h)[c];
      double f_2 = jet.W(x, t - 2 * h)[c];
      double fd = (8 * (f1 - f_1) - (f2 - f_2)) / (12 * h);
      CHECK(d1[c] == doctest::Approx(fd).epsilon(1e-6));
    }
  }
  CHECK(tested == 20);
}

TEST_CASE("transverse space derivative matches spectral differentiation") {
  Profiles prof = make_profiles(2.5);
  Jet jet = make_resolved_jet(prof);
  Grid3 g{192};
  const double t = 0.05;
  Field w = build_jet(jet, g, t).W;
  // (a . grad) W assembled from spectral partials
  Field ref = Field::zero(g, Rank::vector3);
  for (int axis = 0; axis < 3; ++axis)
    axpy(ref, jet.axis_a()[axis], partial(w, axis));
  Field ana = jet_derivative(jet, 0, 1, g, t);
  Field diff = sub(ana, ref);
  CHECK(lp_norm(diff, 2.0) / lp_norm(ana, 2.0) < 1e-6);
}

TEST_CASE("axial transport identity: div W equals mu^{-1} dt(W . zeta)") {
  Profiles prof = make_profiles(2.5);
  Jet jet = make_resolved_jet(prof);
  Grid3 g{192};
  const double t = 0.4;
  Field w = build_jet(jet, g, t).W;
  Field divw = divergence(w);
  // mu^{-1} dt psi_zeta phi: contract the analytic time derivative with zeta
  Field dtw = jet_derivative(jet, 1, 0, g, t);
  Field ref(g, Rank::scalar);
  const auto& z = jet.zeta();
  for (std::size_t i = 0; i < g.n3(); ++i)
    ref.at(0, i) = (dtw.at(0, i) * z[0] + dtw.at(1, i) * z[1] +
                    dtw.at(2, i) * z[2]) /
                   jet.params().mu;
  Field diff = sub(divw, ref);
  CHECK(lp_norm(diff, 2.0) / lp_norm(ref, 2.0) < 1e-8);
}

TEST_CASE("oscillation transport: div(W x W) equals mu^{-1} dt(G) zeta") {
  Profiles prof = make_profiles(2.5);
  Jet jet = make_resolved_jet(prof);
  Grid3 g{192};
  const double t = 0.11;
  Field w = build_jet(jet, g, t).W;
  Field lhs = div_outer(w, w);
  Field rhs(g, Rank::vector3);
  const auto& z = jet.zeta();
  const int n = g.n;
  for (int kz = 0; kz < n; ++kz)
    for (int jy = 0; jy < n; ++jy)
      for (int ix = 0; ix < n; ++ix) {
        std::array<double, 3> x{g.coord(ix), g.coord(jy), g.coord(kz)};
        double gdot = jet.G(x, t, 1) / jet.params().mu;
        std::size_t id = g.idx(ix, jy, kz);
        for (int c = 0; c < 3; ++c) rhs.at(c, id) = gdot * z[c];
      }
  Field diff = sub(lhs, rhs);
  CHECK(lp_norm(diff, 2.0) / lp_norm(rhs, 2.0) < 1e-4);
}

TEST_CASE("curl curl of amplitude-times-potential is divergence free") {
  Profiles prof = make_profiles(2.5);
  Jet jet = make_resolved_jet(prof);
  Grid3 g{64};
  Field v = build_jet(jet, g, 0.0).V;
  // smooth amplitude a(x) = 2 + sin x cos y
  Field av(g, Rank::vector3);
  for (int kz = 0; kz < g.n; ++kz)
    for (int jy = 0; jy < g.n; ++jy)
      for (int ix = 0; ix < g.n; ++ix) {
        double a = 2.0 + std::sin(g.coord(ix)) * std::cos(g.coord(jy));
        std::size_t id = g.idx(ix, jy, kz);
        for (int c = 0; c < 3; ++c) av.at(c, id) = a * v.at(c, id);
      }
  Field cc = curl_curl(av);
  CHECK(lp_norm(divergence(cc), 2.0) < 1e-10 * lp_norm(cc, 2.0) + 1e-12);
}

TEST_CASE("norm scaling regressions against lambda") {
  Profiles prof = make_profiles(2.5);
  DirectionSet s = make_direction_set();
  const DirectionFrame& fr = s.family[0][0];
  std::vector<ScalingPoint> sched;
  for (double lam : {8.0, 16.0, 32.0, 64.0})
    sched.push_back({lam, 1.0 / lam, 1.0 / std::sqrt(lam), lam});

  // p = q: the L^q normalization is scale free
  ScalingReport r0 = verify_scaling(fr, prof, 1, 2.5, 0, 0, sched);
  CHECK(std::abs(r0.slope) < 0.05);
  CHECK(r0.ok);

  // p = 2: slope (1/2 - 1/q) d log(sigma^2 r) / d log lambda = -0.25
  ScalingReport r2 = verify_scaling(fr, prof, 1, 2.0, 0, 0, sched);
  CHECK(r2.slope == doctest::Approx(-0.25).epsilon(0.05));
  CHECK(r2.ok);

  // one space derivative at p = q gains exactly lambda
  ScalingReport rk = verify_scaling(fr, prof, 1, 2.5, 0, 1, sched);
  CHECK(rk.slope == doctest::Approx(1.0).epsilon(0.05));
  CHECK(rk.ok);

  // one time derivative gains lambda sigma mu / r
  ScalingReport rj = verify_scaling(fr, prof, 1, 2.5, 1, 0, sched);
  CHECK(rj.ok);
}

TEST_CASE("shipped translations give pairwise disjoint jet supports") {
  Profiles prof = make_profiles(2.5);
  DirectionSet s = make_direction_set();
  const double sigma = 0.03;
  auto plan = assign_translations(s, sigma, {5, 13}, {true, false});
  std::vector<Jet> jets;
  for (int k = 0; k < 6; ++k) {
    JetParams jp;
    jp.sigma = sigma;
    jp.r = 0.6;
    jp.mu = 16.0;
    jp.n_lambda = 1;
    jp.q = 2.5;
    jp.lambda = 5.0 / sigma;  // omega = 5
    jets.emplace_back(s.family[0][k], jp, prof, plan.alpha[0][k]);
  }
  Grid3 g{48};
  const double t = 0.77;
  std::vector<Field> ws;
  for (const Jet& j : jets) ws.push_back(build_jet(j, g, t, true).W);
  double worst = 0;
  for (int a = 0; a < 6; ++a)
    for (int b = a + 1; b < 6; ++b)
      for (std::size_t i = 0; i < g.n3(); ++i) {
        double pa = std::abs(ws[a].at(0, i)) + std::abs(ws[a].at(1, i)) +
                    std::abs(ws[a].at(2, i));
        double pb = std::abs(ws[b].at(0, i)) + std::abs(ws[b].at(1, i)) +
                    std::abs(ws[b].at(2, i));
        worst = std::max(worst, pa * pb);
      }
  CHECK(worst == 0.0);
}

TEST_CASE("table-based grid sampling equals direct pointwise evaluation") {
  // the sampler reduces grid phases to lookup tables; values must agree with
  // per-point analytic evaluation for a tilted family frame and t != 0
  Profiles prof = make_profiles(2.5);
  JetParams jp;
  jp.lambda = 4.0;
  jp.sigma = 0.25;
  jp.r = 0.5;
  jp.mu = 4.0;
  jp.n_lambda = 5;  // omega = 5, divisible by the family denominator
  DirectionSet s = make_direction_set();
  Jet jet(s.family[0][1], jp, prof, {0.31, 1.27, 2.03});
  Grid3 g{48};
  const Real t = 0.37;
  JetFields jf = build_jet(jet, g, t, true);
  Field dW = jet_derivative(jet, 1, 1, g, t, true);
  Field G1 = jet_g_field(jet, g, t, 1, true);
  Real worst = 0;
  Rng rng(2026);
  for (int trial = 0; trial < 300; ++trial) {
    int i = int(rng.uniform() * g.n), j = int(rng.uniform() * g.n),
        k = int(rng.uniform() * g.n);
    std::array<Real, 3> x{g.coord(i), g.coord(j), g.coord(k)};
    std::size_t id = g.idx(i, j, k);
    auto w = jet.W(x, t);
    auto v = jet.V(x, t);
    auto d = jet.deriv(x, t, 1, 1);
    for (int c = 0; c < 3; ++c) {
      worst = std::max(worst, std::abs(jf.W.at(c, id) - w[c]));
      worst = std::max(worst, std::abs(jf.V.at(c, id) - v[c]));
      worst = std::max(worst, std::abs(dW.at(c, id) - d[c]) /
                                  (1.0 + std::abs(d[c])));
    }
    worst = std::max(worst, std::abs(G1.at(0, id) - jet.G(x, t, 1)) /
                                (1.0 + std::abs(jet.G(x, t, 1))));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("resolution contract: under-resolved grids are rejected") {
  Profiles prof = make_profiles(2.5);
  Jet jet = make_resolved_jet(prof);
  CHECK(min_resolution(jet.params()) == 18);
  Grid3 tiny{12};
  CHECK_THROWS_AS(build_jet(jet, tiny, 0.0), JfError);
  CHECK_NOTHROW(build_jet(jet, tiny, 0.0, true));
}

TEST_CASE("degenerate equal-concentration jet keeps the unit norm") {
  Profiles prof = make_profiles(2.5);
  JetParams jp = resolved_params();
  jp.sigma = jp.r = 0.25;
  jp.lambda = 4.0;  // keeps omega = 1 at the new concentration
  DirectionSet s = make_direction_set();
  Jet jet(s.family[0][4], jp, prof, {0, 0, 0});
  CHECK(jet_lp_norm(jet, 2.5) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("invalid jet parameters are rejected") {
  Profiles prof = make_profiles(2.5);
  DirectionSet s = make_direction_set();
  JetParams jp = resolved_params();
  jp.lambda = 4.3;  // omega not an integer
  CHECK_THROWS_AS(Jet(s.family[0][0], jp, prof, {0, 0, 0}), JfError);
  jp = resolved_params();
  jp.mu = 0.5;
  CHECK_THROWS_AS(Jet(s.family[0][0], jp, prof, {0, 0, 0}), JfError);
  jp = resolved_params();
  jp.sigma = 0.6;  // sigma > r
  CHECK_THROWS_AS(Jet(s.family[0][0], jp, prof, {0, 0, 0}), JfError);
}
