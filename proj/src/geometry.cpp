#include "jetforge/geometry.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

namespace jetforge {

Rat dot(const RVec3& a, const RVec3& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}

RVec3 cross(const RVec3& a, const RVec3& b) {
  return RVec3{a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z,
               a.x * b.y - a.y * b.x};
}

namespace {

RVec3 rvec(long long x, long long y, long long z, long long den) {
  return RVec3{Rat(x, den), Rat(y, den), Rat(z, den)};
}

DirectionFrame frame_from(long long x, long long y, long long z,
                          long long ax, long long ay, long long az,
                          long long den) {
  DirectionFrame f;
  f.zeta = rvec(x, y, z, den);
  f.a = rvec(ax, ay, az, den);
  f.c = cross(f.zeta, f.a);
  f.den = den;
  return f;
}

std::array<Real, 6> vec6(const std::array<Real, 9>& R) {
  // (xx, yy, zz, xy, xz, yz); input is row-major 3x3, symmetrized
  return {R[0], R[4], R[8], 0.5 * (R[1] + R[3]), 0.5 * (R[2] + R[6]),
          0.5 * (R[5] + R[7])};
}

Eigen::Matrix<Real, 6, 6> family_matrix(const DirectionSet& set, int family) {
  Eigen::Matrix<Real, 6, 6> B;
  for (int k = 0; k < 6; ++k) {
    auto z = set.family[family][k].zeta.dbl();
    B(0, k) = z[0] * z[0];
    B(1, k) = z[1] * z[1];
    B(2, k) = z[2] * z[2];
    B(3, k) = z[0] * z[1];
    B(4, k) = z[0] * z[2];
    B(5, k) = z[1] * z[2];
  }
  return B;
}

}  // namespace

DirectionSet make_direction_set() {
  DirectionSet s;
  // family 0: 3-4-5 rational unit vectors, one pair per coordinate plane
  s.family[0] = {
      frame_from(3, 4, 0, -4, 3, 0, 5),  frame_from(3, -4, 0, 4, 3, 0, 5),
      frame_from(0, 3, 4, 0, -4, 3, 5),  frame_from(0, 3, -4, 0, 4, 3, 5),
      frame_from(4, 0, 3, -3, 0, 4, 5),  frame_from(-4, 0, 3, 3, 0, 4, 5),
  };
  // family 1: 5-12-13 analogues, disjoint from family 0
  s.family[1] = {
      frame_from(12, 5, 0, -5, 12, 0, 13), frame_from(12, -5, 0, 5, 12, 0, 13),
      frame_from(0, 12, 5, 0, -5, 12, 13), frame_from(0, 12, -5, 0, 5, 12, 13),
      frame_from(5, 0, 12, -12, 0, 5, 13), frame_from(-5, 0, 12, 12, 0, 5, 13),
  };
  s.n_lambda = 65;  // lcm(5, 13)
  return s;
}

bool frame_is_orthonormal(const DirectionFrame& f) {
  return dot(f.zeta, f.zeta) == Rat(1) && dot(f.a, f.a) == Rat(1) &&
         dot(f.c, f.c) == Rat(1) && dot(f.zeta, f.a) == Rat(0) &&
         dot(f.zeta, f.c) == Rat(0) && dot(f.a, f.c) == Rat(0);
}

bool frame_times_den_is_integer(const DirectionFrame& f) {
  auto integral = [&](const RVec3& v) {
    for (const Rat* r : {&v.x, &v.y, &v.z})
      if ((Rat(f.den) * *r).denominator() != 1) return false;
    return true;
  };
  return integral(f.zeta) && integral(f.a) && integral(f.c);
}

std::array<Real, 6> decompose_weights_raw(const DirectionSet& set, int family,
                                          const std::array<Real, 9>& R) {
  Eigen::Matrix<Real, 6, 6> B = family_matrix(set, family);
  auto v = vec6(R);
  Eigen::Matrix<Real, 6, 1> rhs;
  for (int i = 0; i < 6; ++i) rhs(i) = v[i];
  Eigen::Matrix<Real, 6, 1> w = B.fullPivLu().solve(rhs);
  std::array<Real, 6> out;
  for (int i = 0; i < 6; ++i) out[i] = w(i);
  return out;
}

std::array<Real, 6> decompose_matrix(const DirectionSet& set, int family,
                                     const std::array<Real, 9>& R) {
  auto w = decompose_weights_raw(set, family, R);
  std::array<Real, 6> g;
  for (int i = 0; i < 6; ++i) {
    if (w[i] <= 0.0) {
      std::ostringstream os;
      os << "decompose_matrix: non-positive weight " << w[i] << " at index "
         << i << " for matrix [";
      for (int k = 0; k < 9; ++k) os << R[k] << (k + 1 < 9 ? "," : "]");
      throw JfError(os.str());
    }
    g[i] = std::sqrt(w[i]);
  }
  return g;
}

std::array<Rat, 6> identity_weights_exact(const DirectionSet& set,
                                          int family) {
  // exact Gaussian elimination on the 6x6 rational system B w = vec(Id)
  Rat B[6][7];
  for (int k = 0; k < 6; ++k) {
    const RVec3& z = set.family[family][k].zeta;
    B[0][k] = z.x * z.x;
    B[1][k] = z.y * z.y;
    B[2][k] = z.z * z.z;
    B[3][k] = z.x * z.y;
    B[4][k] = z.x * z.z;
    B[5][k] = z.y * z.z;
  }
  B[0][6] = B[1][6] = B[2][6] = Rat(1);
  B[3][6] = B[4][6] = B[5][6] = Rat(0);
  for (int col = 0; col < 6; ++col) {
    int piv = -1;
    for (int r = col; r < 6; ++r)
      if (B[r][col] != Rat(0)) { piv = r; break; }
    require(piv >= 0, "identity_weights_exact: family does not span");
    if (piv != col)
      for (int c = 0; c < 7; ++c) std::swap(B[piv][c], B[col][c]);
    for (int r = 0; r < 6; ++r) {
      if (r == col || B[r][col] == Rat(0)) continue;
      Rat f = B[r][col] / B[col][col];
      for (int c = col; c < 7; ++c) B[r][c] -= f * B[col][c];
    }
  }
  std::array<Rat, 6> w;
  for (int i = 0; i < 6; ++i) w[i] = B[i][6] / B[i][i];
  return w;
}

std::pair<Real, Real> gamma_ball_bounds(const DirectionSet& set, int family,
                                        Real radius, int samples) {
  Real max_gamma = 0.0, min_weight = 1e300;
  auto probe = [&](const std::array<Real, 9>& E) {
    std::array<Real, 9> R = E;
    R[0] += 1.0;
    R[4] += 1.0;
    R[8] += 1.0;
    auto w = decompose_weights_raw(set, family, R);
    for (Real v : w) {
      min_weight = std::min(min_weight, v);
      if (v > 0) max_gamma = std::max(max_gamma, std::sqrt(v));
    }
  };
  // deterministic extremal candidates: signed coordinate directions in the
  // 6-dim space of symmetric matrices, scaled to Frobenius radius
  for (int c = 0; c < 6; ++c) {
    for (Real sgn : {1.0, -1.0}) {
      std::array<Real, 9> E{};
      Real amp = sgn * radius;
      if (c < 3) {
        E[4 * c] = amp;
      } else {
        int i = c == 3 ? 0 : (c == 4 ? 0 : 1);
        int j = c == 3 ? 1 : 2;
        E[3 * i + j] = E[3 * j + i] = amp / std::sqrt(2.0);
      }
      probe(E);
    }
  }
  Rng rng(1234);
  for (int s = 0; s < samples; ++s) {
    std::array<Real, 9> E{};
    Real d[6];
    Real nrm2 = 0;
    for (int c = 0; c < 6; ++c) {
      d[c] = rng.normal();
      nrm2 += d[c] * d[c] * (c < 3 ? 1.0 : 2.0);
    }
    Real sc = radius * std::pow(rng.uniform(), 1.0 / 6.0) / std::sqrt(nrm2);
    E[0] = d[0] * sc;
    E[4] = d[1] * sc;
    E[8] = d[2] * sc;
    E[1] = E[3] = d[3] * sc;
    E[2] = E[6] = d[4] * sc;
    E[5] = E[7] = d[5] * sc;
    probe(E);
  }
  return {max_gamma, min_weight};
}

namespace {

inline Real wrap_pi(Real v) {
  v = std::fmod(v, kTwoPi);
  if (v < -kPi) v += kTwoPi;
  if (v >= kPi) v -= kTwoPi;
  return v;
}

struct TubeGeom {
  std::array<Real, 3> zeta, a, c, alpha;
  Real omega;
  long long den = 1;  // frame denominator; centerlines close after 2 pi den
};

// fractional distance of x to the nearest integer
inline Real frac_dist(Real x) {
  Real f = x - std::floor(x);
  return std::min(f, 1.0 - f);
}

// Exact overlap certification for one ordered tube pair. Every centerline of
// f maps, under g's transverse coordinates, to a closed orbit
//   tau -> (phi_a + na tau, phi_c + nc tau) on the unit torus, na/nc integers
// because all phase rates are integer multiples of 2 pi.  The tube cross
// sections inflate the box half-widths by W = sigma (omega_g/omega_f) sqrt2.
// Returns min over orbit windows of (distance - requirement), in fractional
// units; positive certifies disjointness.
Real pair_clearance(const TubeGeom& f, const TubeGeom& g, Real sigma) {
  const Real wa = (sigma * (1.0 + std::sqrt(2.0) * g.omega / f.omega)) / kTwoPi;
  const Real wc = wa;  // same inflated half-width on both coordinates
  Real za = 0, zc = 0;
  for (int d = 0; d < 3; ++d) {
    za += f.zeta[d] * g.a[d];
    zc += f.zeta[d] * g.c[d];
  }
  Real na_r = f.den * g.omega * za, nc_r = f.den * g.omega * zc;
  long long na = llround(na_r), nc = llround(nc_r);
  require(std::abs(na_r - na) < 1e-9 && std::abs(nc_r - nc) < 1e-9,
          "pair_clearance: non-integer phase rate");
  const int m = int(f.omega + 0.5);
  Real best = 1e300;
  for (int pa = 0; pa < m; ++pa) {
    for (int pc = 0; pc < m; ++pc) {
      std::array<Real, 3> x0;
      for (int d = 0; d < 3; ++d)
        x0[d] = f.alpha[d] + kTwoPi * (pa * f.a[d] + pc * f.c[d]) / f.omega -
                g.alpha[d];
      Real phi_a = 0, phi_c = 0;
      for (int d = 0; d < 3; ++d) {
        phi_a += g.omega * x0[d] * g.a[d] / kTwoPi;
        phi_c += g.omega * x0[d] * g.c[d] / kTwoPi;
      }
      if (na == 0 && nc == 0) {
        Real clear = std::max(frac_dist(phi_a) - wa, frac_dist(phi_c) - wc);
        best = std::min(best, clear);
        continue;
      }
      if (na == 0 || nc == 0) {
        // one coordinate constant, the other sweeps the whole circle
        Real cst = na == 0 ? frac_dist(phi_a) - wa : frac_dist(phi_c) - wc;
        best = std::min(best, cst);
        continue;
      }
      // enumerate the |na| tau-windows where the a-coordinate enters its box
      long long aa = std::llabs(na);
      Real half_tau = wa / Real(aa);
      for (long long w = 0; w < aa; ++w) {
        // window center: phi_a + na*tau = integer  =>  tau = (w - phi_a)/na
        Real tau0 = (Real(w) - phi_a) / Real(na);
        tau0 -= std::floor(tau0);
        // c-coordinate over the window: mid and half-span
        Real c_mid = phi_c + Real(nc) * tau0;
        Real c_half = std::abs(Real(nc)) * half_tau;
        Real clear = frac_dist(c_mid) - (c_half + wc);
        best = std::min(best, clear);
        if (best <= 0.0) return best;
      }
    }
  }
  return best;
}

}  // namespace

TranslationPlan assign_translations(const DirectionSet& set, Real sigma,
                                    const std::array<long long, 2>& omega,
                                    std::array<bool, 2> active) {
  TranslationPlan plan;
  std::vector<TubeGeom> placed;
  Rng rng(987654321);
  Real global_margin = 1e300;
  for (int fam = 0; fam < 2; ++fam) {
    for (std::size_t k = 0; k < set.family[fam].size(); ++k) {
      if (!active[fam]) {
        plan.alpha[fam].push_back({0.0, 0.0, 0.0});
        continue;
      }
      const DirectionFrame& fr = set.family[fam][k];
      TubeGeom t;
      t.zeta = fr.zeta.dbl();
      t.a = fr.a.dbl();
      t.c = fr.c.dbl();
      t.omega = Real(omega[fam]);
      t.den = fr.den;
      // best-of-N candidate search maximizing the worst pairwise clearance
      Real best_worst = -1e300;
      std::array<Real, 3> best_alpha{0, 0, 0};
      for (int attempt = 0; attempt < 4000; ++attempt) {
        for (int d = 0; d < 3; ++d) t.alpha[d] = rng.uniform(0.0, kTwoPi);
        Real worst = 1e300;
        for (const TubeGeom& p : placed) {
          // each order is a complete overlap test on its own, so the pair is
          // certified disjoint if either direction finds positive clearance
          Real clear = std::max(pair_clearance(t, p, sigma),
                                pair_clearance(p, t, sigma));
          worst = std::min(worst, clear);
          if (worst <= best_worst) break;
        }
        if (worst > best_worst) {
          best_worst = worst;
          best_alpha = t.alpha;
          if (placed.empty() || best_worst > 0.2 / kTwoPi) break;  // good enough
        }
      }
      require(best_worst > 0.0,
              "assign_translations: could not separate tube supports");
      t.alpha = best_alpha;
      if (!placed.empty())
        global_margin = std::min(global_margin, best_worst);
      placed.push_back(t);
      plan.alpha[fam].push_back(t.alpha);
    }
  }
  plan.margin = placed.size() > 1 ? global_margin : 1e300;
  return plan;
}

}  // namespace jetforge
