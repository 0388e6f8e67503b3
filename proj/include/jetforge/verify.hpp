#pragma once
// Property harness: momentum-balance residual evaluation, Littlewood-Paley
// shell-flux tables, and empirical sweeps for the asymptotic estimates.
//
// Policy: exact discrete identities must pass a fixed tolerance; asymptotic
// inequalities are verified on the scaling EXPONENT only (log-log regression
// over dyadic sweeps), with the fitted constant reported, never asserted.

#include <cstdint>
#include <string>
#include <vector>

#include "jetforge/iteration.hpp"

namespace jetforge {

// ---------------------------------------------------------------------------
// momentum-balance residual

struct ResidualNode {
  Real t = 0;
  Real l2 = 0, l1 = 0;
  Real ref = 0;  // largest single term in the balance at this node
  Real rel = 0;  // l2 / max(ref, tiny)
};

// residual of dt u - nu lap u + div(u (x) u) + grad p - div R per time node.
// dt u uses u.dt_frames when present (hybrid convention), otherwise the
// 4th-order centered finite-difference stencil (truncation O(dt^4)).
// Requires at least 5 time nodes.
std::vector<ResidualNode> nsr_residual(const TimeField& u, const TimeField& R,
                                       const TimeField& p, Real nu);

// ---------------------------------------------------------------------------
// shell flux

struct ShellFlux {
  int shell = 0;       // dyadic band 2^j <= |k| < 2^{j+1}
  Real linear = 0;     // nu * integral |grad v_j|^2
  Real nonlinear = 0;  // integral v_j . P_j div(u (x) u)
  Real ratio = 0;      // |nonlinear| / linear (0 when linear = 0)
};

// per-shell energy-balance table for one velocity frame
std::vector<ShellFlux> shell_flux_analysis(const Field& u, Real nu,
                                           int max_shell);
// time-averaged table over all frames of a TimeField
std::vector<ShellFlux> shell_flux_analysis(const TimeField& u, Real nu,
                                           int max_shell);

// ---------------------------------------------------------------------------
// estimate sweeps

enum class EstimateName {
  commutator,       // mollification commutator, slope 2 in ell
  improved_holder,  // fast-slow product excess, slope -1/p in lambda
  inverse_gain,     // antidivergence on high frequencies, slope -1 in kappa
  jet_scaling,      // jet norm exponents across lambda doublings
  amplitude_bounds, // amplitude L^p sizes against their stated scale (info)
  mollified_stress  // mollified-stress L1 against its stated bound (info)
};

const char* estimate_name(EstimateName name);

struct EstimateConfig {
  int grid_n = 64;
  Real p = 2.5;   // Lebesgue exponent used by the sweep where applicable
  Real q = 2.5;
  int sweep = 4;  // dyadic sweep length (>= 3)
};

struct CheckPoint {
  Real x = 0;         // sweep variable (ell, lambda, kappa, ...)
  Real measured = 0;  // measured left-hand side
};

struct CheckReport {
  std::string id;
  std::uint64_t seed = 0;
  std::string bound_form;  // human-readable right-hand side
  std::vector<CheckPoint> points;
  Real fitted_exponent = 0;
  Real expected_exponent = 0;
  Real exponent_dev = 0;   // |fitted - expected|
  Real fitted_constant = 0;
  Real confidence = 0;     // max log-space deviation from the fitted line
  bool exact_check = false;  // identity-class check: tolerance must pass
  bool pass = false;
  std::string to_csv() const;  // sweep table, 17 significant digits
};

// deterministic under (name, config, seed)
CheckReport estimate_check(EstimateName name, const EstimateConfig& cfg,
                           std::uint64_t seed);

// summary table: one row per report, merged in the given order
std::string summary_csv(const std::vector<CheckReport>& reports);

// random band-limited field with spectrum ~ |k|^-2 (fixed seed); vector
// fields are Leray-projected when solenoidal = true
Field random_band_field(const Grid3& g, Rank rank, int k_max,
                        std::uint64_t seed, bool solenoidal = false);

}  // namespace jetforge
