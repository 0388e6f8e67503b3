#pragma once
// Intermittent jets: thin periodic tubes oscillating along rational
// directions, built from the L^q-normalized profiles. Jets are immutable
// closures evaluated analytically at arbitrary (x, t); derivatives come from
// the exact profile term algebra, never from sampled-field interpolation.

#include <array>
#include <vector>

#include "jetforge/field.hpp"
#include "jetforge/geometry.hpp"
#include "jetforge/profiles.hpp"

namespace jetforge {

struct JetParams {
  Real lambda = 1;       // base frequency
  Real sigma = 0.25;     // tube cross-section concentration
  Real r = 0.5;          // along-axis concentration
  Real mu = 4;           // temporal oscillation rate
  long long n_lambda = 1;  // common frequency multiplier N
  Real q = 2.5;          // normalization exponent

  Real omega() const { return Real(n_lambda) * lambda * sigma; }
};

// validates: N*lambda*sigma is a positive integer; 0 < sigma < r < 1 < mu
void validate_jet_params(const JetParams& jp);

class Jet {
 public:
  Jet(const DirectionFrame& frame, const JetParams& jp, const Profiles& prof,
      const std::array<Real, 3>& alpha);

  const DirectionFrame& frame() const { return frame_; }
  const JetParams& params() const { return jp_; }
  const std::array<Real, 3>& alpha() const { return alpha_; }
  Real omega() const { return omega_; }

  // tube phases wrapped to [-pi, pi): u along zeta (advected by mu t),
  // v and w transverse
  void phases(const std::array<Real, 3>& x, Real t, Real& u, Real& v,
              Real& w) const;

  // W = psi_r(u) phi_sigma(v, w) zeta
  std::array<Real, 3> W(const std::array<Real, 3>& x, Real t) const;
  // V = (N lambda)^{-2} psi_r(u) Phi_sigma(v, w) zeta; curl curl of V
  // reproduces W up to lower-order corrections
  std::array<Real, 3> V(const std::array<Real, 3>& x, Real t,
                        int time_order = 0) const;
  // G = psi_r(u)^2 phi_sigma(v, w)^2 and its time derivatives; feeds the
  // temporal corrector since div(W ⊗ W) = mu^{-1} dt(G) zeta
  Real G(const std::array<Real, 3>& x, Real t, int time_order = 0) const;
  // (d/dt)^j (a·grad)^k W  -- the transverse space derivative carries the
  // full lambda^k factor of the derivative estimates
  std::array<Real, 3> deriv(const std::array<Real, 3>& x, Real t, int j,
                            int k) const;

  // profile factors at given phases (exposed for identity tests)
  Real psi_factor(Real u, int order = 0) const { return scaled_.p1.eval(u, order); }
  Real phi_factor(Real v, Real w, int ox = 0, int oy = 0) const {
    return scaled_.p2.phi(v, w, ox, oy);
  }
  Real Phi_factor(Real v, Real w, int ox = 0, int oy = 0) const {
    return scaled_.p2.Phi(v, w, ox, oy);
  }

  const std::array<Real, 3>& zeta() const { return zeta_; }
  const std::array<Real, 3>& axis_a() const { return a_; }
  const std::array<Real, 3>& axis_c() const { return c_; }

 private:
  DirectionFrame frame_;
  JetParams jp_;
  std::array<Real, 3> alpha_;
  const Profiles* prof_;
  ScaledProfiles scaled_;
  Real omega_ = 1;
  std::array<Real, 3> zeta_{}, a_{}, c_{};
};

// minimum resolution for faithful grid sampling: n >= 8 omega / min(sigma, r)
long long min_resolution(const JetParams& jp);

// Sample W and V on the grid. Under-resolved grids raise an error unless
// explicitly allowed (the iteration runs deliberately under-resolved and
// accounts for it via discrete moments).
struct JetFields {
  Field W;
  Field V;
};
JetFields build_jet(const Jet& jet, const Grid3& grid, Real t,
                    bool allow_underresolved = false);

// sampled (d/dt)^j (a·grad)^k W, analytic chain rule
Field jet_derivative(const Jet& jet, int j, int k, const Grid3& grid, Real t,
                     bool allow_underresolved = false);

// sampled (d/dt)^j V (analytic), scalar psi^2 phi^2 density and its analytic
// time derivatives (the oscillation density feeding the temporal corrector)
Field jet_v_field(const Jet& jet, const Grid3& grid, Real t,
                  int time_order = 0, bool allow_underresolved = false);
Field jet_g_field(const Jet& jet, const Grid3& grid, Real t,
                  int time_order = 0, bool allow_underresolved = false);

// L^p norm of (d/dt)^j (a·grad)^k W over the torus, evaluated in profile
// space: the phase map x -> (u,v,w) is measure preserving, so torus averages
// factor into 1D x 2D profile quadratures (resolution independent).
Real jet_lp_norm(const Jet& jet, Real p, int j = 0, int k = 0);

// profile-space second moment: avg(W ⊗ W) = c_q c*_q (sigma^2 r)^((q-2)/q) zeta zeta^T
std::array<Real, 9> jet_second_moment(const Jet& jet);

// log-log scaling regression of jet norms against lambda
struct ScalingPoint {
  Real lambda, sigma, r, mu;
};
struct ScalingReport {
  Real slope = 0;           // fitted d log ||jet|| / d log lambda
  Real expected = 0;        // exponent implied by the derivative estimates
  std::vector<Real> norms;
  bool ok = false;          // |slope - expected| <= tol
};
ScalingReport verify_scaling(const DirectionFrame& frame, const Profiles& prof,
                             long long n_lambda, Real p, int j, int k,
                             const std::vector<ScalingPoint>& schedule,
                             Real tol = 0.1);

}  // namespace jetforge
