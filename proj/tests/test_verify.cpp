#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "jetforge/calculus.hpp"
#include "jetforge/verify.hpp"

using namespace jetforge;

TEST_CASE("residual of the zero state is zero and short series are rejected") {
  Grid3 g{16};
  IterationState s = make_zero_state(g, 0.0, kTwoPi, 5,
                                     [](Real) { return 0.0; }, ParamLedger{});
  auto nodes = nsr_residual(s.u, s.R, s.p, 1e-3);
  REQUIRE(nodes.size() == 5);
  for (const auto& n : nodes) {
    CHECK(n.l2 == 0.0);
    CHECK(n.rel == 0.0);
  }
  IterationState tiny = make_zero_state(
      g, 0.0, kTwoPi, 5, [](Real) { return 0.0; }, ParamLedger{});
  tiny.u.frames.resize(4);
  tiny.u.dt_frames.clear();
  CHECK_THROWS_AS(nsr_residual(tiny.u, s.R, s.p, 1e-3), JfError);
}

TEST_CASE("manufactured solution has a roundoff residual") {
  Grid3 g{24};
  const int nt = 9;
  const Real nu = 1e-3;
  IterationState s = make_zero_state(g, 0.0, kTwoPi, nt,
                                     [](Real) { return 1.0; }, ParamLedger{});
  for (int n = 0; n < nt; ++n) {
    Field u = random_band_field(g, Rank::vector3, 3, 41, true);
    scale(u, 0.1 * (1.0 + 0.4 * std::sin(s.u.time(n))));
    s.u.frames[n] = std::move(u);
  }
  TimeField du = dt_fd(s.u);
  for (int n = 0; n < nt; ++n) {
    const Field& u = s.u.frames[n];
    Field p = inv_laplacian(divergence(divergence(
        sub(Field::zero(g, Rank::symtensor3, true), outer_sym(u, false)))));
    Field defect = du.frames[n];
    axpy(defect, -nu, laplacian(u));
    defect = add(defect, div_outer(u, u));
    defect = add(defect, grad(p));
    s.R.frames[n] = antidivergence(defect);
    s.p.frames[n] = std::move(p);
  }
  s.u.dt_frames = du.frames;
  auto nodes = nsr_residual(s.u, s.R, s.p, nu);
  for (const auto& n : nodes) CHECK(n.rel < 1e-10);

  // same stencil is used when dt frames are absent
  s.u.dt_frames.clear();
  auto nodes_fd = nsr_residual(s.u, s.R, s.p, nu);
  for (const auto& n : nodes_fd) CHECK(n.rel < 1e-10);
}

TEST_CASE("shell flux: parallel single-mode flow and Parseval partition") {
  Grid3 g{32};
  Field u = sample_field(g, Rank::vector3, [](Real x, Real, Real, int d) {
    return d == 2 ? std::sin(x) : 0.0;
  });
  const Real nu = 1e-2;
  auto table = shell_flux_analysis(u, nu, 3);
  REQUIRE(table.size() == 4);
  // |k| = 1 lands in shell 0; the flow is parallel so the transport vanishes
  CHECK(table[0].linear ==
        doctest::Approx(nu * 0.5 * g.volume()).epsilon(1e-10));
  CHECK(std::abs(table[0].nonlinear) < 1e-10);
  for (int j = 1; j <= 3; ++j) {
    CHECK(table[j].linear == doctest::Approx(0.0));
    CHECK(std::abs(table[j].nonlinear) < 1e-12);
  }

  Field r = random_band_field(g, Rank::vector3, 6, 7, true);
  auto rt = shell_flux_analysis(r, nu, 3);
  Real linear_sum = 0;
  for (const auto& sf : rt) linear_sum += sf.linear;
  const Real grad_sq = -l2_inner(r, laplacian(r));
  CHECK(std::abs(linear_sum - nu * grad_sq) <
        1e-8 * std::max(nu * grad_sq, 1e-30));
}

TEST_CASE("commutator sweep fits slope 2 in the mollification scale") {
  EstimateConfig cfg;
  CheckReport rep = estimate_check(EstimateName::commutator, cfg, 11);
  REQUIRE(rep.points.size() >= 3);
  CHECK(rep.pass);
  CHECK(std::abs(rep.fitted_exponent - 2.0) < 0.15);
  CHECK(rep.fitted_constant > 0.0);
}

TEST_CASE("improved Hoelder sweep fits slope -1/p") {
  EstimateConfig cfg;
  cfg.p = 2.5;
  CheckReport rep = estimate_check(EstimateName::improved_holder, cfg, 13);
  CHECK(rep.pass);
  CHECK(std::abs(rep.fitted_exponent + 1.0 / cfg.p) < 0.15);
}

TEST_CASE("inverse gain sweep fits slope -1 in the frequency cutoff") {
  EstimateConfig cfg;
  CheckReport rep = estimate_check(EstimateName::inverse_gain, cfg, 17);
  CHECK(rep.pass);
  CHECK(std::abs(rep.fitted_exponent + 1.0) < 0.15);
}

TEST_CASE("jet scaling sweep matches the derivative exponent") {
  EstimateConfig cfg;
  CheckReport rep = estimate_check(EstimateName::jet_scaling, cfg, 1);
  CHECK(rep.pass);
  CHECK(rep.expected_exponent == doctest::Approx(1.0).epsilon(0.2));
}

TEST_CASE("info checks report constants and margins") {
  EstimateConfig cfg;
  CheckReport amp = estimate_check(EstimateName::amplitude_bounds, cfg, 3);
  CHECK(amp.fitted_constant > 0.0);
  CHECK(!amp.points.empty());
  CheckReport mol = estimate_check(EstimateName::mollified_stress, cfg, 5);
  CHECK(mol.pass);  // mollification stays within the factor-2 margin
  for (const auto& p : mol.points) CHECK(p.measured <= 2.0);
}

TEST_CASE("reports are deterministic under the seed and summarized") {
  EstimateConfig cfg;
  CheckReport a = estimate_check(EstimateName::commutator, cfg, 29);
  CheckReport b = estimate_check(EstimateName::commutator, cfg, 29);
  CHECK(a.to_csv() == b.to_csv());
  CheckReport c = estimate_check(EstimateName::commutator, cfg, 31);
  CHECK(a.points[0].measured != c.points[0].measured);

  std::string sum = summary_csv({a, c});
  CHECK(sum.find("commutator") != std::string::npos);
  CHECK(sum.find("pass") != std::string::npos);
}
