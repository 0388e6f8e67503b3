#pragma once
// Parameter ledger for the convex-integration schedule: the base scalars,
// the derived per-level quantities (frequency, amplitude, concentrations,
// oscillation rate, mollification scale), and the feasibility checker for
// the full admissibility system. Exponent arithmetic runs in exact rationals
// when the inputs are rational and in log10 domain otherwise, because the
// level frequency a^(b^m) overflows doubles after a handful of levels.

#include <map>
#include <string>
#include <vector>

#include "jetforge/common.hpp"
#include "jetforge/geometry.hpp"  // Rat
#include "jetforge/jets.hpp"

namespace jetforge {

// ---------------------------------------------------------------------------
// ledger

struct ParamLedger {
  Real a = 0;      // frequency base, > 1
  Real b = 0;      // frequency tower exponent, > 1 (integer when admissible)
  Real beta = 0;   // amplitude decay exponent, in (0,1)
  Real q = 0;      // normalization exponent, in (2,3)
  Real A = 0;      // accuracy divisor, > q + 2
  Real eps = 0;    // inductive-gain exponent, in (0, eps_star/2)
  Real nu = 0;     // viscosity, > 0
  Real p_aux = 0;  // auxiliary Lebesgue exponent, in (1,2]
  Real T = 0;      // time horizon
  Real e_max = 0;  // sup of the energy profile

  Real eps_star() const { return (3.0 - q) / A; }
};

// key = value text form (accepts decimal or rational "p/q" literals)
std::string ledger_to_text(const ParamLedger& led);
ParamLedger ledger_from_text(const std::string& text);

// ---------------------------------------------------------------------------
// derived schedule

// One level of the schedule. Linear-domain values are +inf when they
// overflow doubles; the log10 companions are always finite.
struct LevelScalars {
  long long m = 0;
  Real log10_lambda = 0, lambda = 0;  // a^(b^m)
  Real log10_delta = 0, delta = 0;    // amplitude^2 scale
  Real log10_sigma = 0, sigma = 0;    // from level m+1
  Real log10_r = 0, r = 0;
  Real log10_mu = 0, mu = 0;
  Real log10_ell = 0, ell = 0;        // mollification scale
  Real i_max_estimate = 0;            // asymptotic cutoff count
  bool lambda_sigma_integral = false; // exact-rational witness when available
};

std::vector<LevelScalars> derive_schedule(const ParamLedger& led,
                                          long long m_max);

// ---------------------------------------------------------------------------
// exact integrality witness

// Does base^(num/den) evaluate to an integer? Decided exactly by prime
// factorization of the (positive integer) base.
bool integer_rational_power(long long base, long long num, long long den);

// Continued-fraction rationalization of a double; returns false when no
// denominator <= maxden reproduces x to within tol.
bool approx_rational(Real x, long long maxden, Real tol, Rat& out);

// Witness for the smoothness integrality condition a^((3-q-(q+2)e*)/3) in N
// (with b in N). exact_path is true when a is an integer and the exponent
// rationalizes, in which case `integral` is decided in exact arithmetic.
struct IntegralityWitness {
  bool exact_path = false;
  bool integral = false;
  Real value = 0;        // a^((3-q-(q+2)e*)/3), linear domain
  Real deviation = 0;    // distance to the nearest integer (float path)
  bool b_integral = false;
};
IntegralityWitness az90_witness(const ParamLedger& led);

// ---------------------------------------------------------------------------
// feasibility

struct ConstraintRecord {
  std::string name;
  bool satisfied = false;
  Real margin = 0;  // signed: >= 0 iff satisfied
};

struct FeasibilityReport {
  std::vector<ConstraintRecord> items;
  bool ok = false;

  const ConstraintRecord* find(const std::string& name) const;
  std::string to_csv() const;  // name,satisfied,margin
};

// Evaluates every constraint with a signed margin; infeasible is a result,
// not an error.
FeasibilityReport check_feasibility(const ParamLedger& led);

// ---------------------------------------------------------------------------
// admissibility search

struct SearchBox {
  Real q_lo = 2.0001, q_hi = 2.001;
  Real eps_lo = 0.02, eps_hi = 0.08;
  // beta is scanned on a log grid (it is forced to ~1/b^2 by the window
  // 2 b^2 beta <= eps)
  Real log10_beta_lo = -11, log10_beta_hi = -8;
  long long b_lo = 7300, b_hi = 7400;
  Real A = 5.0;
  long long base_integer = 2;  // a = N^(3/(3-q-(q+2)e*)) makes AZ90 exact
  Real nu = 1e-3, p_aux = 1.0005, T = kTwoPi, e_max = 2.0;
};

struct SearchResult {
  std::vector<ParamLedger> admissible;            // sorted by descending q
  std::map<std::string, long long> binding;       // worst constraint counts
  long long points_scanned = 0;
};

SearchResult search_admissible(const SearchBox& box, long long resolution);

// ---------------------------------------------------------------------------
// desk presets

enum class PresetName { identity_scale, tiny, micro };
PresetName preset_from_string(const std::string& s);

struct DeskPreset {
  std::string name;
  ParamLedger ledger;
  JetParams jets;            // single-jet form (n_lambda = 1, axis frames)
  JetParams jets_iteration;  // family-frame form (n_lambda = frame lcm)
  long long grid_n = 64;
  long long n_t = 9;
  int family = 0;            // direction family used by the iteration
  std::vector<std::string> violated;  // asymptotic constraints knowingly broken
  FeasibilityReport report;
};

// Identity-exact configurations at desk scale. These deliberately sit far
// from the admissible asymptotic regime; `violated` lists what is broken.
DeskPreset desk_preset(PresetName name);

}  // namespace jetforge
