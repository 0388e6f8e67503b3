#include "jetforge/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

namespace jetforge {

namespace {

Real ipow(Real x, int n) {
  Real r = 1;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

}  // namespace

Real eval_terms(const Terms1& f, Real z) {
  const Real z2 = z * z;
  if (z2 >= 1.0) return 0.0;
  Real acc = 0;
  for (const Term1& t : f)
    acc += t.c * ipow(z, t.m) * ipow(1.0 - z2, t.k) *
           (t.g == 0.0 ? 1.0 : std::exp(-t.g * z2));
  return acc;
}

Real eval_terms(const Terms2& f, Real x, Real y) {
  const Real u = x * x + y * y;
  if (u >= 1.0) return 0.0;
  Real acc = 0;
  for (const Term2& t : f)
    acc += t.c * ipow(x, t.p) * ipow(y, t.s) * ipow(u, t.m) *
           ipow(1.0 - u, t.k) * (t.g == 0.0 ? 1.0 : std::exp(-t.g * u));
  return acc;
}

Terms1 d_dz(const Terms1& f) {
  Terms1 out;
  for (const Term1& t : f) {
    if (t.m > 0) out.push_back({t.c * t.m, t.m - 1, t.k, t.g});
    if (t.k > 0) out.push_back({-2.0 * t.c * t.k, t.m + 1, t.k - 1, t.g});
    if (t.g != 0.0) out.push_back({-2.0 * t.c * t.g, t.m + 1, t.k, t.g});
  }
  return simplify(std::move(out));
}

namespace {

// derivative of a 2D term along one coordinate; xvar selects x or y
Terms2 d_one(const Terms2& f, bool xvar) {
  Terms2 out;
  for (const Term2& t : f) {
    int pw = xvar ? t.p : t.s;
    if (pw > 0) {
      Term2 n = t;
      n.c *= pw;
      (xvar ? n.p : n.s) -= 1;
      out.push_back(n);
    }
    // du/dx = 2x (resp. 2y): each u-dependent factor gains one power of x|y
    if (t.m > 0) {
      Term2 n = t;
      n.c *= 2.0 * t.m;
      n.m -= 1;
      (xvar ? n.p : n.s) += 1;
      out.push_back(n);
    }
    if (t.k > 0) {
      Term2 n = t;
      n.c *= -2.0 * t.k;
      n.k -= 1;
      (xvar ? n.p : n.s) += 1;
      out.push_back(n);
    }
    if (t.g != 0.0) {
      Term2 n = t;
      n.c *= -2.0 * t.g;
      (xvar ? n.p : n.s) += 1;
      out.push_back(n);
    }
  }
  return out;
}

}  // namespace

Terms2 d_dx(const Terms2& f) { return simplify(d_one(f, true)); }
Terms2 d_dy(const Terms2& f) { return simplify(d_one(f, false)); }

Terms2 laplacian2(const Terms2& f) {
  Terms2 out = d_dx(d_dx(f));
  Terms2 yy = d_dy(d_dy(f));
  out.insert(out.end(), yy.begin(), yy.end());
  return simplify(std::move(out));
}

namespace {

// derivative with respect to u for radial terms (p = s = 0)
Terms2 d_du(const Terms2& f) {
  Terms2 out;
  for (const Term2& t : f) {
    require(t.p == 0 && t.s == 0, "d_du: non-radial term");
    if (t.m > 0) out.push_back({t.c * t.m, 0, 0, t.m - 1, t.k, t.g});
    if (t.k > 0) out.push_back({-t.c * t.k, 0, 0, t.m, t.k - 1, t.g});
    if (t.g != 0.0) out.push_back({-t.c * t.g, 0, 0, t.m, t.k, t.g});
  }
  return simplify(std::move(out));
}

// laplacian of a radial function f(u), u = x^2 + y^2: 4 u f'' + 4 f'
Terms2 laplacian_radial(const Terms2& f) {
  Terms2 d1 = d_du(f);
  Terms2 d2 = d_du(d1);
  Terms2 out;
  for (const Term2& t : d2) out.push_back({4.0 * t.c, 0, 0, t.m + 1, t.k, t.g});
  for (const Term2& t : d1) out.push_back({4.0 * t.c, 0, 0, t.m, t.k, t.g});
  return simplify(std::move(out));
}

}  // namespace

Terms1 simplify(Terms1 f) {
  std::map<std::tuple<int, int, Real>, Real> acc;
  for (const Term1& t : f) acc[{t.m, t.k, t.g}] += t.c;
  Terms1 out;
  for (const auto& [key, c] : acc)
    if (std::abs(c) > 1e-300)
      out.push_back({c, std::get<0>(key), std::get<1>(key), std::get<2>(key)});
  return out;
}

Terms2 simplify(Terms2 f) {
  std::map<std::tuple<int, int, int, int, Real>, Real> acc;
  for (const Term2& t : f) acc[{t.p, t.s, t.m, t.k, t.g}] += t.c;
  Terms2 out;
  for (const auto& [key, c] : acc)
    if (std::abs(c) > 1e-300)
      out.push_back({c, std::get<0>(key), std::get<1>(key), std::get<2>(key),
                     std::get<3>(key), std::get<4>(key)});
  return out;
}

Real simpson(const std::function<Real(Real)>& f, Real a, Real b, int n) {
  require(n >= 2 && n % 2 == 0, "simpson: need an even interval count");
  const Real h = (b - a) / n;
  Real acc = f(a) + f(b);
  for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

namespace {
constexpr int kQuadN = 1 << 15;
}

Real lq_norm_1d(const Terms1& f, Real q) {
  Real integ = simpson(
      [&](Real z) { return std::pow(std::abs(eval_terms(f, z)), q); }, -1.0,
      1.0, kQuadN);
  return std::pow(integ, 1.0 / q);
}

Real lq_norm_2d(const Terms2& f, Real q) {
  for (const Term2& t : f)
    require(t.p == 0 && t.s == 0, "lq_norm_2d: non-radial term");
  Real integ =
      kTwoPi * simpson(
                   [&](Real rho) {
                     return std::pow(std::abs(eval_terms(f, rho, 0.0)), q) * rho;
                   },
                   0.0, 1.0, kQuadN);
  return std::pow(integ, 1.0 / q);
}

namespace {

Real l2_sq_1d(const Terms1& f) {
  return simpson(
      [&](Real z) {
        Real v = eval_terms(f, z);
        return v * v;
      },
      -1.0, 1.0, kQuadN);
}

Real l2_sq_2d(const Terms2& f) {
  return kTwoPi * simpson(
                      [&](Real rho) {
                        Real v = eval_terms(f, rho, 0.0);
                        return v * v * rho;
                      },
                      0.0, 1.0, kQuadN);
}

void scale_terms(Terms1& f, Real a) {
  for (Term1& t : f) t.c *= a;
}
void scale_terms(Terms2& f, Real a) {
  for (Term2& t : f) t.c *= a;
}

}  // namespace

Profiles make_profiles(Real q, ProfileShape shape) {
  require(q > 2.0 && q < 3.0, "make_profiles: q must lie in (2,3)");
  Profiles out;
  out.shape = shape;
  out.p1.q = q;
  out.p2.q = q;

  Terms2 Phi;   // radial potential, supported in the unit disk
  Terms1 psi;   // odd 1D profile, supported in (-1,1)
  if (shape == ProfileShape::poly_bump) {
    // high polynomial orders keep phi and psi six times differentiable
    Phi = {{1.0, 0, 0, 0, 18, 0.0}};
    psi = {{1.0, 1, 16, 0.0}};
  } else {
    const Real w = 0.15;  // gaussian width; window keeps compact support
    const Real g = 1.0 / (2.0 * w * w);
    Phi = {{1.0, 0, 0, 0, 5, g}};
    psi = {{1.0, 1, 5, g}};
  }
  Terms2 phi = laplacian_radial(Phi);
  scale_terms(phi, -1.0);  // phi := -laplacian(Phi), so phi has zero mean

  const Real norm2 = lq_norm_2d(phi, q);
  require(norm2 > 0, "make_profiles: degenerate 2D profile");
  scale_terms(phi, 1.0 / norm2);
  scale_terms(Phi, 1.0 / norm2);  // keep phi = -laplacian(Phi)

  const Real norm1 = lq_norm_1d(psi, q);
  require(norm1 > 0, "make_profiles: degenerate 1D profile");
  scale_terms(psi, 1.0 / norm1);

  out.p2.c_q = l2_sq_2d(phi) / (kTwoPi * kTwoPi);
  out.p1.c_q_star = l2_sq_1d(psi) / kTwoPi;

  out.p1.dpsi[0] = psi;
  for (int j = 1; j <= kProfileDerivOrder; ++j)
    out.p1.dpsi[j] = d_dz(out.p1.dpsi[j - 1]);

  out.p2.dphi[0][0] = phi;
  out.p2.dPhi[0][0] = Phi;
  for (int ox = 0; ox <= kProfileDerivOrder; ++ox) {
    if (ox > 0) {
      out.p2.dphi[ox][0] = d_dx(out.p2.dphi[ox - 1][0]);
      out.p2.dPhi[ox][0] = d_dx(out.p2.dPhi[ox - 1][0]);
    }
    for (int oy = 1; oy <= kProfileDerivOrder; ++oy) {
      out.p2.dphi[ox][oy] = d_dy(out.p2.dphi[ox][oy - 1]);
      out.p2.dPhi[ox][oy] = d_dy(out.p2.dPhi[ox][oy - 1]);
    }
  }
  return out;
}

Real Scaled1D::eval(Real z, int order) const {
  const Real zr = z / r;
  if (zr * zr >= 1.0) return 0.0;
  return std::pow(r, -1.0 / base->q - order) * base->eval(zr, order);
}

Real Scaled2D::phi(Real x, Real y, int ox, int oy) const {
  const Real xs = x / sigma, ys = y / sigma;
  if (xs * xs + ys * ys >= 1.0) return 0.0;
  return std::pow(sigma, -2.0 / base->q - ox - oy) * base->phi(xs, ys, ox, oy);
}

Real Scaled2D::Phi(Real x, Real y, int ox, int oy) const {
  const Real xs = x / sigma, ys = y / sigma;
  if (xs * xs + ys * ys >= 1.0) return 0.0;
  return std::pow(sigma, -2.0 / base->q - ox - oy) * base->Phi(xs, ys, ox, oy);
}

ScaledProfiles rescale_profiles(const Profiles& p, Real sigma, Real r) {
  require(sigma > 0 && sigma < 1 && r > 0 && r < 1,
          "rescale_profiles: sigma and r must lie in (0,1)");
  ScaledProfiles out;
  out.p2.base = &p.p2;
  out.p2.sigma = sigma;
  out.p1.base = &p.p1;
  out.p1.r = r;
  return out;
}

}  // namespace jetforge
