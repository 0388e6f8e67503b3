#pragma once
// Compactly supported profile functions for intermittent jets.
//
// Profiles are stored as sums of closed-form terms so that derivatives of any
// order needed by the jet chain rule are themselves exact term sums:
//   1D terms:  c * z^m * (1-z^2)^k * exp(-g z^2)        on |z| < 1
//   2D terms:  c * x^p * y^s * u^m * (1-u)^k * exp(-g u) with u = x^2+y^2 < 1
// Both families are closed under partial differentiation.

#include <array>
#include <functional>
#include <vector>

#include "jetforge/common.hpp"

namespace jetforge {

struct Term1 {
  Real c = 0;
  int m = 0;  // power of z
  int k = 0;  // power of (1 - z^2)
  Real g = 0; // gaussian rate
};

struct Term2 {
  Real c = 0;
  int p = 0;  // power of x
  int s = 0;  // power of y
  int m = 0;  // power of u = x^2 + y^2
  int k = 0;  // power of (1 - u)
  Real g = 0; // gaussian rate in u
};

using Terms1 = std::vector<Term1>;
using Terms2 = std::vector<Term2>;

Real eval_terms(const Terms1& f, Real z);
Real eval_terms(const Terms2& f, Real x, Real y);

Terms1 d_dz(const Terms1& f);
Terms2 d_dx(const Terms2& f);
Terms2 d_dy(const Terms2& f);
Terms2 laplacian2(const Terms2& f);
Terms1 simplify(Terms1 f);
Terms2 simplify(Terms2 f);

// adaptive-free composite Simpson quadrature of a 1D function on [a,b]
Real simpson(const std::function<Real(Real)>& f, Real a, Real b, int n);

// L^q norm over the support (|z|<1, resp. the unit disk for radial 2D terms)
Real lq_norm_1d(const Terms1& f, Real q);
Real lq_norm_2d(const Terms2& f, Real q);  // requires all terms radial (p=s=0)

enum class ProfileShape { poly_bump, gaussian_truncated };

inline constexpr int kProfileDerivOrder = 6;  // stored derivative orders

// 1D oscillation profile psi: odd, compactly supported in (-1,1),
// normalized so that the integral of |psi|^q over R equals 1.
struct Profile1D {
  Real q = 0;
  Real c_q_star = 0;  // (1/2pi) * integral of psi^2
  std::array<Terms1, kProfileDerivOrder + 1> dpsi;  // dpsi[j] = psi^(j)

  Real eval(Real z, int order = 0) const { return eval_terms(dpsi[order], z); }
};

// 2D concentration profile pair (Phi, phi = -laplacian Phi), radial,
// supported in the unit disk, with the integral of |phi|^q over R^2 equal 1.
struct ProfilePair2D {
  Real q = 0;
  Real c_q = 0;  // (1/(2pi)^2) * integral of phi^2
  // partial derivatives indexed [order in x][order in y]
  std::array<std::array<Terms2, kProfileDerivOrder + 1>, kProfileDerivOrder + 1> dphi;
  std::array<std::array<Terms2, kProfileDerivOrder + 1>, kProfileDerivOrder + 1> dPhi;

  Real phi(Real x, Real y, int ox = 0, int oy = 0) const {
    return eval_terms(dphi[ox][oy], x, y);
  }
  Real Phi(Real x, Real y, int ox = 0, int oy = 0) const {
    return eval_terms(dPhi[ox][oy], x, y);
  }
};

struct Profiles {
  ProfilePair2D p2;
  Profile1D p1;
  ProfileShape shape = ProfileShape::poly_bump;
};

// Build and L^q-normalize the profile pair; 2 < q < 3.
Profiles make_profiles(Real q, ProfileShape shape = ProfileShape::poly_bump);

// Concentration rescaling: eval(x) = scale^(-dim/q) * base(x/scale), plus the
// matching potential scaling keeping phi_sigma = -sigma^2 laplacian Phi_sigma.
struct Scaled1D {
  const Profile1D* base = nullptr;
  Real r = 1;
  // psi_r^(j)(z) = r^(-1/q - j) psi^(j)(z/r), zero for |z| >= r
  Real eval(Real z, int order = 0) const;
};

struct Scaled2D {
  const ProfilePair2D* base = nullptr;
  Real sigma = 1;
  Real phi(Real x, Real y, int ox = 0, int oy = 0) const;
  Real Phi(Real x, Real y, int ox = 0, int oy = 0) const;  // phi = -sigma^2 lap Phi
};

struct ScaledProfiles {
  Scaled2D p2;
  Scaled1D p1;
};

// sigma, r in (0,1); keeps the unit L^q normalization of both profiles.
ScaledProfiles rescale_profiles(const Profiles& p, Real sigma, Real r);

}  // namespace jetforge
