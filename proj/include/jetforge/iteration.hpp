#pragma once
// One convex-integration step for the Navier-Stokes-Reynolds system:
// mollify the state, partition the stress with radial cutoffs, build
// direction amplitudes, assemble the jet perturbation, and produce a new
// (velocity, stress, pressure) triple.
//
// Discrete-exactness policy: every quantity the step adds is also the
// quantity the new stress absorbs, with the same grid operators and the same
// hybrid time derivatives (analytic jet factors, 4th-order finite differences
// for amplitudes). The output therefore solves the system to roundoff on any
// grid, resolved or not; resolution quality shows up only in the *size* of
// the new stress and in the reported bookkeeping remainders.

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "jetforge/jets.hpp"
#include "jetforge/mollify.hpp"
#include "jetforge/params.hpp"

namespace jetforge {

// ---------------------------------------------------------------------------
// state

struct IterationState {
  long long m = 0;
  TimeField u;  // vector3, divergence-free, mean-free
  TimeField R;  // symtensor3, trace-free
  TimeField p;  // scalar, zero mean
  std::vector<Real> e_samples;  // prescribed energy profile on the time grid
  ParamLedger ledger;
  Grid3 grid;
};

IterationState make_zero_state(const Grid3& g, Real t0, Real t1, int nt,
                               const std::function<Real(Real)>& e,
                               const ParamLedger& led);

// Measured state invariants (max over nodes): divergence, mean, pressure
// reconstruction deviation, and the energy gap window.
struct StateCheck {
  Real div_u = 0;
  Real mean_u = 0;
  Real pressure_dev = 0;   // ||p - invlap divdiv(R - u(x)u)||_L2, relative
  Real gap_min = 0, gap_max = 0;  // e(t) - integral |u|^2 over nodes
  bool ok = false;
};
StateCheck check_state(const IterationState& s, Real gap_upper);

// ---------------------------------------------------------------------------
// configuration

struct StepConfig {
  JetParams jets;       // family form; n_lambda a multiple of the family den
  int family = 0;       // family used by even cutoff levels
  Real delta_m1 = 2.0;  // delta_{m+1}: amplitude^2 scale of this step
  Real delta_m2 = 0.6;  // delta_{m+2}: energy threshold scale
  Real lambda_m = 1.0;  // previous-level frequency (enters lambda_m^{-2 eps})
  Real eps = 0.04;
  Real nu = 1e-3;
  MollifierSpec moll{0.4, 3};  // shared space/time kernel scale
  bool discrete_calibration = true;  // grid second moments in the amplitudes
  bool allow_underresolved = true;
  bool assert_inductive = false;  // assert (not just log) asymptotic bounds
  bool keep_fields = true;        // retain output frames (memory heavy)
  Real kappa_star = 1.0;          // reported against ||w||_{C_t L^q}
  Real gamma_radius = 0.45;       // certified matrix-decomposition ball

  // cutoff scale (sigma^2 r)^((q-2)/q) and the stress gauges
  Real X() const {
    return std::pow(jets.sigma * jets.sigma * jets.r,
                    (jets.q - 2.0) / jets.q);
  }
  Real cutoff_base() const {
    return X() * delta_m1 * std::pow(lambda_m, -2.0 * eps);
  }
  Real rho_i(int i) const {  // i >= 1
    return std::pow(4.0, i + 1) * cutoff_base();
  }
};

// iteration configuration matching a desk preset (time axis [t0, t1])
StepConfig step_config_for(const DeskPreset& preset, Real t0 = 0.0,
                           Real t1 = kTwoPi);

// ---------------------------------------------------------------------------
// mollification

struct MollifiedState {
  TimeField u, R, p;  // u carries hybrid dt frames
  MollifyReport moll;
  Real commutator_ct_l1 = 0;  // sup_t L1 distance between the exact stress
                              // and the plainly mollified one
};

// Mollifies (u, R); the pressure is rebuilt from the mollified pair and the
// stress is re-closed by antidivergence of the mollified-state defect, so the
// mollified triple solves the system to roundoff. The difference from the
// plainly mollified stress (the commutator term) is reported.
MollifiedState mollify_state(const IterationState& s, const StepConfig& cfg);

// ---------------------------------------------------------------------------
// stress partition

// smooth radial cutoff: 1 on [0, 3/4], 0 on [1, inf)
Real chi_hat(Real s);
// sqrt(chi_hat(4^{-i} s) - chi_hat(4^{-i+1} s)); chi_tilde(0, s) = sqrt(chi_hat(s))
Real chi_tilde(int i, Real s);

struct StressPartition {
  bool trivial = false;        // R_ell == 0: chi_(0) == 1, not materialized
  std::vector<TimeField> chi;  // scalar cutoff fields chi_(i), i = 0..i_max
  std::vector<Real> rho;       // gauges; rho[0] = 0 placeholder (rho0 below)
  std::vector<Real> rho0;      // per-node time-mollified base gauge
  std::vector<Real> e_tilde;   // per-node adjusted energy headroom
  std::vector<Real> chi0_sq;   // per-node integral of chi_(0)^2
  std::vector<std::vector<Real>> chi_sq;  // [i][node] integral of chi_(i)^2
  int i_max = 0;
  Real X = 0;
  Real base = 0;  // cutoff normalization X delta_{m+1} lambda_m^{-2 eps}
};

// rho(t) before time mollification is max{e_tilde - X delta_{m+2}/2, 0} over
// 3 * integral chi_(0)^2; throws "energy-overshoot" when e(t) < integral|u|^2.
StressPartition partition_stress(const MollifiedState& ms,
                                 const IterationState& s,
                                 const StepConfig& cfg);

// ---------------------------------------------------------------------------
// jets for the step

struct JetSet {
  DirectionSet dirs;
  std::shared_ptr<Profiles> prof;
  std::array<std::vector<Jet>, 2> jets;  // per family, one per frame
  std::array<bool, 2> active{false, false};
  std::array<long long, 2> omega{0, 0};
  bool disjoint = true;  // translation plan certified; false = fallback grid
  Real margin = 0;
};

// Families by cutoff parity: level i uses family (cfg.family + i) mod 2.
JetSet build_jet_set(const StepConfig& cfg, int i_max);

// ---------------------------------------------------------------------------
// amplitudes

// scalar amplitude at one time node; spatially constant frames stay symbolic
struct AmpFrame {
  bool is_const = false;
  Real c = 0;
  Field f;
  bool zero() const { return is_const ? c == 0.0 : f.is_zero(); }
};

struct AmplitudeEntry {
  int i = 0;       // cutoff index
  int family = 0;  // direction family of this cutoff level
  int k = 0;       // frame index within the family
  AmpFrame a;
};

struct AmplitudeFrameSet {
  int node = 0;
  std::vector<AmplitudeEntry> entries;  // zero entries omitted
};

// a_(zeta) = K_zeta rho_i^{1/2} chi_(i) gamma_zeta(Id - R_ell/rho_i), with
// K_zeta the second-moment normalization: measured grid mean of psi^2 phi^2
// when discrete_calibration is on, the analytic c_q c*_q (sigma^2 r)^((q-2)/q)
// otherwise. Throws a domain error naming the grid point when Id - R/rho
// leaves the certified decomposition ball.
AmplitudeFrameSet build_amplitudes(const StressPartition& sp,
                                   const MollifiedState& ms, const JetSet& js,
                                   int node, const StepConfig& cfg,
                                   const Grid3& grid);

// ---------------------------------------------------------------------------
// perturbation and stress assembly

struct Perturbation {
  TimeField w_p, w_c, w_t;  // principal / incompressibility / temporal parts
  Real kappa_star = 0;      // measured ||w||_{C_t L^q} / delta_{m+1}^{1/2}
};

// w_p = sum a W; w_p + w_c = sum curl curl(a V) (exactly solenoidal,
// w_c is the difference); w_t = -mu^{-1} P_H P_{neq 0}(sum a^2 psi^2 phi^2 zeta).
// All three carry hybrid dt frames.
Perturbation build_perturbation(const StressPartition& sp,
                                const MollifiedState& ms, const JetSet& js,
                                const StepConfig& cfg, const Grid3& grid);

// Per-node stress assembly inputs; dt fields follow the hybrid convention.
struct StressInputs {
  Field u_ell, dt_u_ell, R_ell, p_ell;
  Field w_p, wpc, w_t;      // wpc = w_p + w_c
  Field dt_wpc, dt_wt;
  Field Tg_dot;             // hybrid d/dt of sum a^2 psi^2 phi^2 zeta
  Field rho_chi_sq;         // scalar sum_i rho_i chi_(i)^2 (incl. rho_0 term)
  Real nu = 1.0;
  Real mu = 1.0;
};

struct StressOutputs {
  Field R_lin, R_corr, R_osc;  // new stress parts (trace-free symmetric)
  Field P;                     // oscillation pressure
  Field R_new, p_new;
  Real ad90_rel = 0;  // residual of div R_osc + grad P = dt w_t + div(...)
};

// R_lin = R(-nu lap w + dt wpc + div(u_ell (x) w + w (x) u_ell));
// R_corr = R div((w_c + w_t) (x) w + w_p (x) (w_c + w_t));
// R_osc absorbs dt w_t + div(w_p (x) w_p + R_ell) - grad P via antidivergence
// of its own defining identity, which therefore holds to roundoff.
StressOutputs build_new_stress(const StressInputs& in);

// ---------------------------------------------------------------------------
// the full step

struct StepNodeReport {
  Real t = 0;
  Real energy_new = 0, energy_old = 0, e = 0;
  Real gap = 0;          // e - energy_new
  Real rho0 = 0;
  Real residual_l2 = 0, residual_l1 = 0, residual_rel = 0;
  Real quadratic_scale = 0;  // ||div(u1 (x) u1)||_L2 (residual reference)
  Real div_u = 0, mean_u = 0;
  Real u_linf = 0;
  Real wp_lq = 0, wc_lq = 0, wt_lq = 0;
  Real R_l1 = 0;
  Real e906_total = 0;      // integral |w_p|^2
  Real e906_target = 0;     // 3 sum_i rho_i integral chi_(i)^2
  Real e906_rel = 0;        // |total - target| / total (0 when total = 0)
  Real cross_energy_rel = 0;  // off-diagonal jet-pair share of the total
  Real hi_freq_rel = 0;     // |w_p|^2 fraction above half the jet frequency
  Real ad90_rel = 0;
  bool pumping_ok = true;   // energy_new > energy_old wherever rho0 > 0
};

struct StepReport {
  std::vector<StepNodeReport> nodes;
  Real commutator_ct_l1 = 0;
  int i_max = 0;
  bool disjoint_supports = true;
  Real w_ct_lq = 0;         // sup_t ||w||_{L^q}
  Real kappa_measured = 0;  // w_ct_lq / delta_{m+1}^{1/2}
  bool pumping_ok = true;
  Real residual_rel_max = 0;
  Real div_u_max = 0;
  Real e906_rel_max = 0;
  std::vector<std::string> notes;  // logged margins / violated asymptotics

  std::string to_csv() const;  // one row per node, 17-digit floats
};

struct StepResult {
  IterationState next;  // frames retained only when cfg.keep_fields
  StepReport report;
};

StepResult step(const IterationState& s, const StepConfig& cfg);

}  // namespace jetforge
