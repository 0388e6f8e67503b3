#pragma once
// Rational direction families on the unit sphere with orthonormal rational
// frames, the six-direction decomposition of symmetric matrices near the
// identity, and support-disjoint translation assignment for jet tubes.

#include <array>
#include <boost/rational.hpp>

#include "jetforge/common.hpp"

namespace jetforge {

using Rat = boost::rational<long long>;

struct RVec3 {
  Rat x{0}, y{0}, z{0};
  std::array<Real, 3> dbl() const {
    return {boost::rational_cast<Real>(x), boost::rational_cast<Real>(y),
            boost::rational_cast<Real>(z)};
  }
};

Rat dot(const RVec3& a, const RVec3& b);
RVec3 cross(const RVec3& a, const RVec3& b);

// Orthonormal rational frame (zeta, a, c = zeta x a). `den` is the smallest
// positive integer with den*zeta, den*a, den*c all integer vectors.
struct DirectionFrame {
  RVec3 zeta, a, c;
  long long den = 1;
};

// Two disjoint six-direction families; family parity selects which one a
// given cutoff level uses. n_lambda is the common integrality factor (lcm of
// all frame denominators).
struct DirectionSet {
  std::array<std::vector<DirectionFrame>, 2> family;
  long long n_lambda = 1;
};

DirectionSet make_direction_set();

// Exact-rational checks used by tests and the integrality witness.
bool frame_is_orthonormal(const DirectionFrame& f);
bool frame_times_den_is_integer(const DirectionFrame& f);

// Solve R = sum_k gamma_k^2 zeta_k (x) zeta_k over one family.
// Returns gamma_k >= 0. Throws JfError (domain error, offending matrix
// printed) if any weight is non-positive beyond roundoff.
std::array<Real, 6> decompose_matrix(const DirectionSet& set, int family,
                                     const std::array<Real, 9>& R);
// Same weights but squared (the linear solve output), no positivity demand.
std::array<Real, 6> decompose_weights_raw(const DirectionSet& set, int family,
                                          const std::array<Real, 9>& R);

// sup over the closed ball |R - Id|_F <= radius of |gamma_k| (and a check
// that all weights stay positive there), estimated by deterministic extremal
// candidates plus seeded random sampling. Returns {max_gamma, min_weight}.
std::pair<Real, Real> gamma_ball_bounds(const DirectionSet& set, int family,
                                        Real radius, int samples = 2000);

// Exact-rational oracle for the family at the identity: each weight is 1/2.
std::array<Rat, 6> identity_weights_exact(const DirectionSet& set, int family);

// Translation assignment. The tube of frame f with concentration sigma and
// integer oscillation factor omega_f occupies
//   { x : |wrap(omega_f (x-alpha).a)| < sigma and |wrap(omega_f (x-alpha).c)| < sigma }.
// Chooses alphas so all active tubes are pairwise disjoint (with margin),
// certified by dense deterministic sampling. Throws on failure.
// Note the packing limit: tubes from different families sharing a transverse
// axis can only be separated when sigma (1/omega_0 + 1/omega_1) is below the
// combined lattice half-spacing pi/lcm(omega_0, omega_1); callers with fat
// desk-scale tubes should restrict to the family actually in use.
struct TranslationPlan {
  // per family, per frame
  std::array<std::vector<std::array<Real, 3>>, 2> alpha;
  Real margin = 0.0;  // smallest pairwise clearance found (profile units)
};
TranslationPlan assign_translations(const DirectionSet& set, Real sigma,
                                    const std::array<long long, 2>& omega,
                                    std::array<bool, 2> active = {true, true});

}  // namespace jetforge
