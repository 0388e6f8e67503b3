#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "jetforge/geometry.hpp"

using namespace jetforge;

TEST_CASE("direction families: rational unit frames, integrality, disjoint") {
  DirectionSet s = make_direction_set();
  std::set<std::array<Real, 3>> seen;
  for (int fam = 0; fam < 2; ++fam) {
    REQUIRE(s.family[fam].size() == 6);
    for (const auto& f : s.family[fam]) {
      CHECK(frame_is_orthonormal(f));
      CHECK(frame_times_den_is_integer(f));
      CHECK(s.n_lambda % f.den == 0);
      auto z = f.zeta.dbl();
      CHECK(!seen.count(z));
      seen.insert(z);
      // antipodes must not appear either (families are direction sets)
      CHECK(!seen.count({-z[0], -z[1], -z[2]}));
    }
  }
  CHECK(s.n_lambda == 65);
}

TEST_CASE("exact identity weights are 1/2 for both families") {
  DirectionSet s = make_direction_set();
  for (int fam = 0; fam < 2; ++fam) {
    auto w = identity_weights_exact(s, fam);
    for (const Rat& r : w) CHECK(r == Rat(1, 2));
  }
}

TEST_CASE("decomposition reconstructs random symmetric matrices near Id") {
  DirectionSet s = make_direction_set();
  Rng rng(2024);
  for (int fam = 0; fam < 2; ++fam) {
    for (int trial = 0; trial < 200; ++trial) {
      // random symmetric E with |E|_F <= 0.45
      Real d[6];
      Real nrm2 = 0;
      for (int c = 0; c < 6; ++c) {
        d[c] = rng.normal();
        nrm2 += d[c] * d[c] * (c < 3 ? 1.0 : 2.0);
      }
      Real sc = 0.45 * std::pow(rng.uniform(), 1.0 / 6.0) / std::sqrt(nrm2);
      std::array<Real, 9> R{1 + d[0] * sc, d[3] * sc, d[4] * sc,
                            d[3] * sc, 1 + d[1] * sc, d[5] * sc,
                            d[4] * sc, d[5] * sc, 1 + d[2] * sc};
      auto g = decompose_matrix(s, fam, R);
      // reconstruct
      std::array<Real, 9> rec{};
      for (int k = 0; k < 6; ++k) {
        auto z = s.family[fam][k].zeta.dbl();
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j)
            rec[3 * i + j] += g[k] * g[k] * z[i] * z[j];
      }
      Real err = 0;
      for (int k = 0; k < 9; ++k) err = std::max(err, std::abs(rec[k] - R[k]));
      CHECK(err < 1e-12);
    }
  }
}

TEST_CASE("weights stay positive on the working ball; domain error outside") {
  DirectionSet s = make_direction_set();
  for (int fam = 0; fam < 2; ++fam) {
    auto [max_gamma, min_weight] = gamma_ball_bounds(s, fam, 0.45, 4000);
    CHECK(min_weight > 0.0);
    CHECK(max_gamma < 1.2);
  }
  // far from Id the solve must go negative and throw
  std::array<Real, 9> bad{1, 0, 0, 0, 1, 0, 0, 0, -2};
  CHECK_THROWS_AS(decompose_matrix(s, 0, bad), JfError);
}

// The winding numbers of rational tube pairs on the torus bound how thick
// disjoint tubes can be: within the first family (denominator 5) the worst
// pair sweeps transverse phase windows spaced 1/32 apart, capping sigma
// near 0.045; with both families active the second family's internal pairs
// (denominator 13) force sigma down near 0.001.
TEST_CASE("translation assignment: tubes within one family") {
  DirectionSet s = make_direction_set();
  auto plan = assign_translations(s, 0.03, {5, 13}, {true, false});
  CHECK(plan.alpha[0].size() == 6);
  CHECK(plan.margin > 0.0);
}

TEST_CASE("translation assignment: thin tubes across both families") {
  DirectionSet s = make_direction_set();
  auto plan = assign_translations(s, 0.001, {5, 13}, {true, true});
  CHECK(plan.alpha[0].size() == 6);
  CHECK(plan.alpha[1].size() == 6);
  CHECK(plan.margin > 0.0);
}
