#include "jetforge/iteration.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "jetforge/calculus.hpp"

namespace jetforge {

namespace {

constexpr Real kTinyFloor = 1e-300;

bool tf_all_zero(const TimeField& f) {
  for (const Field& fr : f.frames)
    if (!fr.is_zero()) return false;
  return true;
}

Real frame_energy(const Field& u) {
  if (u.is_zero()) return 0.0;
  Real n = lp_norm(u, 2);
  return n * n;
}

// scalar-series analogue of mollify_time (same kernel, reflective ends)
std::vector<Real> mollify_series(const std::vector<Real>& v, Real dt,
                                 const MollifierSpec& spec) {
  auto ker = time_kernel(dt, spec);
  const int radius = (int(ker.size()) - 1) / 2;
  const int m = int(v.size()) - 1;
  auto reflect = [&](int i) {
    i = std::abs(i);
    i %= 2 * m;
    return i <= m ? i : 2 * m - i;
  };
  std::vector<Real> out(v.size(), 0.0);
  for (int i = 0; i < int(v.size()); ++i)
    for (int s = -radius; s <= radius; ++s)
      out[i] += ker[s + radius] * v[reflect(i + s)];
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// state

IterationState make_zero_state(const Grid3& g, Real t0, Real t1, int nt,
                               const std::function<Real(Real)>& e,
                               const ParamLedger& led) {
  require(nt >= 5, "iteration state: need at least 5 time nodes");
  IterationState s;
  s.grid = g;
  s.ledger = led;
  s.u.t0 = s.R.t0 = s.p.t0 = t0;
  s.u.t1 = s.R.t1 = s.p.t1 = t1;
  for (int i = 0; i < nt; ++i) {
    s.u.frames.push_back(Field::zero(g, Rank::vector3));
    s.R.frames.push_back(Field::zero(g, Rank::symtensor3, true));
    s.p.frames.push_back(Field::zero(g, Rank::scalar));
    s.e_samples.push_back(e(t0 + (t1 - t0) * i / (nt - 1)));
  }
  return s;
}

StateCheck check_state(const IterationState& s, Real gap_upper) {
  StateCheck out;
  out.gap_min = 1e300;
  out.gap_max = -1e300;
  for (int n = 0; n < s.u.nt(); ++n) {
    const Field& u = s.u.frames[n];
    out.div_u = std::max(out.div_u, linf_norm(divergence(u)));
    for (Real m : field_mean(u)) out.mean_u = std::max(out.mean_u, std::abs(m));
    // pressure reconstruction from (u, R)
    Field rhs = sub(s.R.frames[n], outer_sym(u, /*dealias=*/false));
    Field pr = inv_laplacian(divergence(divergence(rhs)));
    Real scale = std::max(lp_norm(s.p.frames[n], 2), 1e-12);
    out.pressure_dev = std::max(
        out.pressure_dev, lp_norm(sub(pr, s.p.frames[n]), 2) / scale);
    Real gap = s.e_samples[n] - frame_energy(u);
    out.gap_min = std::min(out.gap_min, gap);
    out.gap_max = std::max(out.gap_max, gap);
  }
  out.ok = out.div_u <= 1e-10 && out.mean_u <= 1e-10 &&
           out.pressure_dev <= 1e-8 && out.gap_min >= -1e-10 &&
           out.gap_max <= gap_upper + 1e-10;
  return out;
}

StepConfig step_config_for(const DeskPreset& preset, Real t0, Real t1) {
  StepConfig cfg;
  cfg.jets = preset.jets_iteration;
  cfg.family = preset.family;
  cfg.eps = preset.ledger.eps;
  cfg.nu = preset.ledger.nu;
  cfg.delta_m1 = 2.0;
  cfg.delta_m2 = 0.6;
  cfg.lambda_m = 1.0;
  const Real dt = (t1 - t0) / Real(preset.n_t - 1);
  // wide enough for a genuine kernel, narrow enough that an energy profile
  // vanishing quadratically at t0 keeps the first node's gauge at exactly 0
  cfg.moll.ell = std::min(2.05 * dt, 0.41);
  cfg.moll.order = 3;
  cfg.assert_inductive = false;
  return cfg;
}

// ---------------------------------------------------------------------------
// mollification

MollifiedState mollify_state(const IterationState& s, const StepConfig& cfg) {
  MollifiedState out;
  if (tf_all_zero(s.u) && tf_all_zero(s.R)) {
    out.u = s.u;
    out.u.dt_frames = s.u.frames;  // zeros
    out.R = s.R;
    out.p = s.p;
    return out;
  }
  out.u = mollify(s.u, cfg.moll, &out.moll);
  out.u.dt_frames = dt_fd(out.u).frames;
  TimeField R_mol = mollify(s.R, cfg.moll);
  out.R.t0 = out.p.t0 = s.u.t0;
  out.R.t1 = out.p.t1 = s.u.t1;
  for (int n = 0; n < s.u.nt(); ++n) {
    const Field& u = out.u.frames[n];
    Field p = inv_laplacian(divergence(divergence(
        sub(R_mol.frames[n], outer_sym(u, /*dealias=*/false)))));
    // re-close the stress so the mollified triple solves the system exactly
    Field defect = out.u.dt_frames[n];
    axpy(defect, -cfg.nu, laplacian(u));
    defect = add(defect, div_outer(u, u));
    defect = add(defect, grad(p));
    Field R = antidivergence(defect);
    out.commutator_ct_l1 =
        std::max(out.commutator_ct_l1, lp_norm(sub(R, R_mol.frames[n]), 1));
    out.p.frames.push_back(std::move(p));
    out.R.frames.push_back(std::move(R));
  }
  return out;
}

// ---------------------------------------------------------------------------
// stress partition

Real chi_hat(Real s) {
  s = std::abs(s);
  if (s <= 0.75) return 1.0;
  if (s >= 1.0) return 0.0;
  const Real x = (s - 0.75) * 4.0;  // (0,1) across the transition
  const Real ga = std::exp(-1.0 / x), gb = std::exp(-1.0 / (1.0 - x));
  return gb / (ga + gb);
}

Real chi_tilde(int i, Real s) {
  const Real hi = chi_hat(std::pow(0.25, i) * s);
  const Real lo = i == 0 ? 0.0 : chi_hat(std::pow(0.25, i - 1) * s);
  return std::sqrt(std::max(hi - lo, 0.0));
}

StressPartition partition_stress(const MollifiedState& ms,
                                 const IterationState& s,
                                 const StepConfig& cfg) {
  StressPartition sp;
  sp.X = cfg.X();
  sp.base = cfg.cutoff_base();
  const int nt = int(s.e_samples.size());
  require(nt == ms.u.nt() || ms.u.nt() == 0,
          "partition_stress: e_samples / frame count mismatch");

  Real r_max = 0;
  for (const Field& f : ms.R.frames) r_max = std::max(r_max, linf_norm(f));
  sp.trivial = r_max == 0.0;
  sp.i_max = 0;
  while (r_max > 0.75 * std::pow(4.0, sp.i_max) * sp.base) ++sp.i_max;

  sp.rho.assign(sp.i_max + 1, 0.0);
  for (int i = 1; i <= sp.i_max; ++i) sp.rho[i] = cfg.rho_i(i);

  const Grid3& g = s.grid;
  std::vector<std::vector<Real>> chi_sq(sp.i_max + 1,
                                        std::vector<Real>(nt, 0.0));
  if (sp.trivial) {
    for (int n = 0; n < nt; ++n) chi_sq[0][n] = g.volume();
  } else {
    sp.chi.resize(sp.i_max + 1);
    for (int i = 0; i <= sp.i_max; ++i) {
      sp.chi[i].t0 = s.u.t0;
      sp.chi[i].t1 = s.u.t1;
      sp.chi[i].frames.resize(nt);
    }
    for (int n = 0; n < nt; ++n) {
      const Field& R = ms.R.frames[n];
      for (int i = 0; i <= sp.i_max; ++i)
        sp.chi[i].frames[n] = Field(g, Rank::scalar);
      Real cell = g.cell_volume();
      for (std::size_t m = 0; m < g.n3(); ++m) {
        Real fro2 = 0;
        for (int c = 0; c < 3; ++c) {
          Real v = R.at(c, m);
          fro2 += v * v;
        }
        for (int c = 3; c < 6; ++c) {
          Real v = R.at(c, m);
          fro2 += 2 * v * v;
        }
        const Real y = std::sqrt(fro2) / sp.base;
        for (int i = 0; i <= sp.i_max; ++i) {
          Real v = chi_tilde(i, y);
          sp.chi[i].frames[n].at(0, m) = v;
          chi_sq[i][n] += v * v * cell;
        }
      }
    }
  }
  sp.chi0_sq = chi_sq[0];
  sp.chi_sq = chi_sq;

  sp.e_tilde.resize(nt);
  std::vector<Real> rho_t(nt);
  for (int n = 0; n < nt; ++n) {
    const Real eu = frame_energy(s.u.frames[n]);
    if (s.e_samples[n] - eu < -1e-10 * std::max(1.0, s.e_samples[n]))
      throw JfError("energy-overshoot: e(t) < integral |u|^2 at node " +
                    std::to_string(n));
    Real et = s.e_samples[n] - eu;
    for (int i = 1; i <= sp.i_max; ++i) et -= 3.0 * sp.rho[i] * chi_sq[i][n];
    sp.e_tilde[n] = et;
    rho_t[n] = std::max(et - 0.5 * sp.X * cfg.delta_m2, 0.0) /
               (3.0 * std::max(chi_sq[0][n], kTinyFloor));
    rho_t[n] = std::sqrt(rho_t[n]);
  }
  const Real dt = (s.u.t1 - s.u.t0) / Real(nt - 1);
  auto smoothed = mollify_series(rho_t, dt, cfg.moll);
  sp.rho0.resize(nt);
  for (int n = 0; n < nt; ++n) sp.rho0[n] = smoothed[n] * smoothed[n];
  return sp;
}

// ---------------------------------------------------------------------------
// jets

JetSet build_jet_set(const StepConfig& cfg, int i_max) {
  JetSet js;
  js.dirs = make_direction_set();
  js.prof = std::make_shared<Profiles>(make_profiles(cfg.jets.q));
  for (int i = 0; i <= i_max; ++i) js.active[(cfg.family + i) % 2] = true;

  const long long den0 = js.dirs.family[cfg.family][0].den;
  require(cfg.jets.n_lambda % den0 == 0,
          "step config: n_lambda must be a multiple of the base family "
          "denominator " +
              std::to_string(den0));
  const long long mult = cfg.jets.n_lambda / den0;

  std::array<JetParams, 2> jp{cfg.jets, cfg.jets};
  for (int f = 0; f < 2; ++f) {
    jp[f].n_lambda = mult * js.dirs.family[f][0].den;
    js.omega[f] = std::llround(jp[f].omega());
  }

  TranslationPlan plan;
  try {
    plan = assign_translations(js.dirs, cfg.jets.sigma, js.omega, js.active);
    js.disjoint = true;
    js.margin = plan.margin;
  } catch (const JfError&) {
    // fat desk-scale tubes can be impossible to separate; fall back to a
    // fixed spread and let the reported cross-energy carry the overlap
    js.disjoint = false;
    js.margin = 0;
    for (int f = 0; f < 2; ++f) {
      plan.alpha[f].resize(js.dirs.family[f].size());
      for (std::size_t k = 0; k < plan.alpha[f].size(); ++k)
        plan.alpha[f][k] = {kTwoPi * (0.13 + 0.17 * Real(k) + 0.31 * f),
                            kTwoPi * (0.29 + 0.23 * Real(k)),
                            kTwoPi * (0.07 + 0.11 * Real(k))};
    }
  }
  for (int f = 0; f < 2; ++f) {
    if (!js.active[f]) continue;
    for (std::size_t k = 0; k < js.dirs.family[f].size(); ++k)
      js.jets[f].emplace_back(js.dirs.family[f][k], jp[f], *js.prof,
                              plan.alpha[f][k]);
  }
  return js;
}

// ---------------------------------------------------------------------------
// amplitudes

namespace {

Real calibration(const Jet& jet, const Grid3& g, Real t, const StepConfig& cfg,
                 const Profiles& prof, Real X) {
  Real mean_g;
  if (cfg.discrete_calibration) {
    mean_g = integral(jet_g_field(jet, g, t, 0, cfg.allow_underresolved)) /
             g.volume();
    require(mean_g > 0, "amplitude calibration: vanishing grid second moment");
  } else {
    mean_g = prof.p2.c_q * prof.p1.c_q_star * X;
  }
  return 1.0 / std::sqrt(mean_g);
}

}  // namespace

AmplitudeFrameSet build_amplitudes(const StressPartition& sp,
                                   const MollifiedState& ms, const JetSet& js,
                                   int node, const StepConfig& cfg,
                                   const Grid3& grid) {
  AmplitudeFrameSet out;
  out.node = node;
  const Real tt = ms.u.time(node);

  for (int i = 0; i <= sp.i_max; ++i) {
    const int fam = (cfg.family + i) % 2;
    const Real rho = i == 0 ? sp.rho0[node] : sp.rho[i];
    if (rho <= 0.0) continue;
    const Real sq_rho = std::sqrt(rho);
    const auto& jets = js.jets[fam];
    require(!jets.empty(), "build_amplitudes: family without jets");

    if (sp.trivial) {
      require(i == 0, "trivial partition with nonzero cutoff index");
      for (int k = 0; k < int(jets.size()); ++k) {
        const Real K = calibration(jets[k], grid, tt, cfg, *js.prof, sp.X);
        AmplitudeEntry e;
        e.i = i;
        e.family = fam;
        e.k = k;
        e.a.is_const = true;
        e.a.c = K * sq_rho * std::sqrt(0.5);  // gamma at the identity
        out.entries.push_back(std::move(e));
      }
      continue;
    }

    const Field& chi = sp.chi[i].frames[node];
    const Field& R = ms.R.frames[node];
    std::array<Field, 6> a;
    for (auto& f : a) f = Field(grid, Rank::scalar);
    std::array<Real, 6> K{};
    for (int k = 0; k < 6; ++k)
      K[k] = calibration(jets[k], grid, tt, cfg, *js.prof, sp.X);
    const int n = grid.n;
    for (int kz = 0; kz < n; ++kz)
      for (int jy = 0; jy < n; ++jy)
        for (int ix = 0; ix < n; ++ix) {
          const std::size_t m = grid.idx(ix, jy, kz);
          const Real c = chi.at(0, m);
          if (c == 0.0) continue;
          // M = Id - R_ell / rho; by convention R/rho := 0 where R vanishes
          std::array<Real, 9> M{1, 0, 0, 0, 1, 0, 0, 0, 1};
          Real dev2 = 0;
          if (!R.is_zero()) {
            const Real inv = 1.0 / rho;
            const Real rxx = R.at(0, m), ryy = R.at(1, m), rzz = R.at(2, m);
            const Real rxy = R.at(3, m), rxz = R.at(4, m), ryz = R.at(5, m);
            M = {1 - rxx * inv, -rxy * inv,     -rxz * inv,
                 -rxy * inv,    1 - ryy * inv,  -ryz * inv,
                 -rxz * inv,    -ryz * inv,     1 - rzz * inv};
            dev2 = (rxx * rxx + ryy * ryy + rzz * rzz +
                    2 * (rxy * rxy + rxz * rxz + ryz * ryz)) *
                   inv * inv;
          }
          if (dev2 > cfg.gamma_radius * cfg.gamma_radius * (1 + 1e-12))
            throw JfError(
                "amplitude domain error: Id - R/rho outside the certified "
                "ball at grid point (" +
                std::to_string(ix) + "," + std::to_string(jy) + "," +
                std::to_string(kz) + "), node " + std::to_string(node) +
                ", cutoff " + std::to_string(i));
          auto gamma = decompose_matrix(js.dirs, fam, M);
          for (int k = 0; k < 6; ++k)
            a[k].at(0, m) = K[k] * sq_rho * c * gamma[k];
        }
    for (int k = 0; k < 6; ++k) {
      AmplitudeEntry e;
      e.i = i;
      e.family = fam;
      e.k = k;
      e.a.f = std::move(a[k]);
      out.entries.push_back(std::move(e));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// amplitude-frame algebra

namespace {

const AmpFrame* find_amp(const AmplitudeFrameSet& s, int i, int fam, int k) {
  for (const auto& e : s.entries)
    if (e.i == i && e.family == fam && e.k == k) return &e.a;
  return nullptr;
}

// acc += a * f, component-wise scalar multiply
void amp_axpy(Field& acc, const AmpFrame& a, const Field& f) {
  if (a.zero() || f.is_zero()) return;
  acc.materialize();
  if (a.is_const) {
    axpy(acc, a.c, f);
    return;
  }
  const Real* s = a.f.comp(0);
  for (int c = 0; c < acc.comps(); ++c) {
    Real* dst = acc.comp(c);
    const Real* src = f.comp(c);
    for (std::size_t m = 0; m < acc.n3(); ++m) dst[m] += s[m] * src[m];
  }
}

// acc[d] += a * g * zeta[d] for a scalar field g
void amp_axpy_dir(Field& acc, const AmpFrame& a, const Field& g,
                  const std::array<Real, 3>& zeta) {
  if (a.zero() || g.is_zero()) return;
  acc.materialize();
  const Real* src = g.comp(0);
  for (int d = 0; d < 3; ++d) {
    Real* dst = acc.comp(d);
    if (a.is_const) {
      const Real s = a.c * zeta[d];
      for (std::size_t m = 0; m < acc.n3(); ++m) dst[m] += s * src[m];
    } else {
      const Real* av = a.f.comp(0);
      const Real z = zeta[d];
      for (std::size_t m = 0; m < acc.n3(); ++m) dst[m] += z * av[m] * src[m];
    }
  }
}

AmpFrame amp_square(const AmpFrame& a, const Grid3& g) {
  AmpFrame out;
  if (a.zero()) {
    out.is_const = true;
    return out;
  }
  if (a.is_const) {
    out.is_const = true;
    out.c = a.c * a.c;
    return out;
  }
  out.f = Field(g, Rank::scalar);
  const Real* s = a.f.comp(0);
  Real* d = out.f.comp(0);
  for (std::size_t m = 0; m < g.n3(); ++m) d[m] = s[m] * s[m];
  return out;
}

// 4th-order centered stencil over a 5-frame window, matching dt_fd
AmpFrame amp_fd(const std::array<AmpFrame, 5>& w, Real h, const Grid3& g) {
  const Real c[5] = {1.0 / (12 * h), -8.0 / (12 * h), 0.0, 8.0 / (12 * h),
                     -1.0 / (12 * h)};
  bool any_field = false;
  for (const auto& a : w)
    if (!a.is_const && !a.zero()) any_field = true;
  AmpFrame out;
  if (!any_field) {
    out.is_const = true;
    out.c = 0;
    for (int j = 0; j < 5; ++j)
      if (!w[j].zero()) out.c += c[j] * w[j].c;
    return out;
  }
  out.f = Field(g, Rank::scalar);
  Real* d = out.f.comp(0);
  for (int j = 0; j < 5; ++j) {
    if (w[j].zero() || c[j] == 0.0) continue;
    if (w[j].is_const) {
      const Real v = c[j] * w[j].c;
      for (std::size_t m = 0; m < g.n3(); ++m) d[m] += v;
    } else {
      const Real* s = w[j].f.comp(0);
      for (std::size_t m = 0; m < g.n3(); ++m) d[m] += c[j] * s[m];
    }
  }
  return out;
}

Real amp_sq_weighted_integral(const AmpFrame& a, const Field& g_field) {
  // integral a^2 * g
  if (a.zero() || g_field.is_zero()) return 0.0;
  if (a.is_const) return a.c * a.c * integral(g_field);
  Real acc = 0;
  const Real* av = a.f.comp(0);
  const Real* gv = g_field.comp(0);
  for (std::size_t m = 0; m < g_field.n3(); ++m)
    acc += av[m] * av[m] * gv[m];
  return acc * g_field.grid.cell_volume();
}

// everything the stress assembly needs at one time node
struct NodeWork {
  Field w_p, wpc, w_t, dt_wpc, dt_wt, Tg, Tg_dot, rho_chi_sq;
  Real diag_energy = 0;  // sum over jets of integral a^2 psi^2 phi^2
};

NodeWork assemble_node(const StressPartition& sp, const JetSet& js,
                       const std::array<const AmplitudeFrameSet*, 5>& win,
                       int node, Real t, Real h, const Grid3& grid,
                       const StepConfig& cfg) {
  NodeWork nw;
  nw.w_p = Field::zero(grid, Rank::vector3);
  nw.Tg = Field::zero(grid, Rank::vector3);
  nw.Tg_dot = Field::zero(grid, Rank::vector3);
  Field S = Field::zero(grid, Rank::vector3);
  Field S_dot = Field::zero(grid, Rank::vector3);

  // union of live (i, family, k) triples across the stencil window
  std::set<std::array<int, 3>> keys;
  for (const auto* s : win)
    for (const auto& e : s->entries)
      if (!e.a.zero()) keys.insert({e.i, e.family, e.k});

  const AmpFrame zero_amp{true, 0.0, Field()};
  for (const auto& key : keys) {
    const int i = key[0], fam = key[1], k = key[2];
    const Jet& jet = js.jets[fam][k];
    std::array<AmpFrame, 5> window;
    for (int j = 0; j < 5; ++j) {
      const AmpFrame* a = find_amp(*win[j], i, fam, k);
      window[j] = a ? *a : zero_amp;
    }
    const AmpFrame& ac = window[2];
    AmpFrame a_dot = amp_fd(window, h, grid);
    std::array<AmpFrame, 5> sq_window;
    for (int j = 0; j < 5; ++j) sq_window[j] = amp_square(window[j], grid);
    AmpFrame a2_dot = amp_fd(sq_window, h, grid);
    const AmpFrame& a2 = sq_window[2];

    const bool allow = cfg.allow_underresolved;
    if (!ac.zero()) {
      JetFields jf = build_jet(jet, grid, t, allow);
      amp_axpy(nw.w_p, ac, jf.W);
      amp_axpy(S, ac, jf.V);
      if (!a_dot.zero()) amp_axpy(S_dot, a_dot, jf.V);
      amp_axpy(S_dot, ac, jet_v_field(jet, grid, t, 1, allow));
      Field G = jet_g_field(jet, grid, t, 0, allow);
      amp_axpy_dir(nw.Tg, a2, G, jet.zeta());
      nw.diag_energy += amp_sq_weighted_integral(ac, G);
      amp_axpy_dir(nw.Tg_dot, a2, jet_g_field(jet, grid, t, 1, allow),
                   jet.zeta());
      if (!a2_dot.zero()) amp_axpy_dir(nw.Tg_dot, a2_dot, G, jet.zeta());
    } else {
      // dead at the center node but alive in the stencil window: only the
      // time-derivative accumulators see it
      if (!a_dot.zero())
        amp_axpy(S_dot, a_dot, jet_v_field(jet, grid, t, 0, allow));
      if (!a2_dot.zero())
        amp_axpy_dir(nw.Tg_dot, a2_dot, jet_g_field(jet, grid, t, 0, allow),
                     jet.zeta());
    }
  }

  nw.wpc = S.is_zero() ? Field::zero(grid, Rank::vector3) : curl_curl(S);
  nw.dt_wpc = S_dot.is_zero() ? Field::zero(grid, Rank::vector3)
                              : curl_curl(S_dot);
  const Real mu = cfg.jets.mu;
  nw.w_t = nw.Tg.is_zero()
               ? Field::zero(grid, Rank::vector3)
               : leray(project_mean_free(nw.Tg));
  if (!nw.w_t.is_zero()) scale(nw.w_t, -1.0 / mu);
  nw.dt_wt = nw.Tg_dot.is_zero()
                 ? Field::zero(grid, Rank::vector3)
                 : leray(project_mean_free(nw.Tg_dot));
  if (!nw.dt_wt.is_zero()) scale(nw.dt_wt, -1.0 / mu);

  // sum_i rho_i chi_(i)^2 (the cutoff part of the oscillation pressure)
  nw.rho_chi_sq = Field(grid, Rank::scalar);
  {
    Real* d = nw.rho_chi_sq.comp(0);
    if (sp.trivial) {
      const Real v = sp.rho0[node];
      for (std::size_t m = 0; m < grid.n3(); ++m) d[m] = v;
    } else {
      for (int i = 0; i <= sp.i_max; ++i) {
        const Real rho = i == 0 ? sp.rho0[node] : sp.rho[i];
        if (rho == 0.0) continue;
        const Real* c = sp.chi[i].frames[node].comp(0);
        for (std::size_t m = 0; m < grid.n3(); ++m) d[m] += rho * c[m] * c[m];
      }
    }
  }
  return nw;
}

}  // namespace

// ---------------------------------------------------------------------------
// perturbation

Perturbation build_perturbation(const StressPartition& sp,
                                const MollifiedState& ms, const JetSet& js,
                                const StepConfig& cfg, const Grid3& grid) {
  const int nt = int(sp.rho0.size());
  const Real t0 = ms.u.t0, t1 = ms.u.t1;
  const Real h = (t1 - t0) / Real(nt - 1);
  Perturbation out;
  out.w_p.t0 = out.w_c.t0 = out.w_t.t0 = t0;
  out.w_p.t1 = out.w_c.t1 = out.w_t.t1 = t1;

  std::map<int, AmplitudeFrameSet> cache;
  auto amps_at = [&](int n) -> const AmplitudeFrameSet* {
    auto it = cache.find(n);
    if (it == cache.end())
      it = cache.emplace(n, build_amplitudes(sp, ms, js, n, cfg, grid)).first;
    return &it->second;
  };
  TimeField probe;
  probe.t0 = t0;
  probe.t1 = t1;
  probe.frames.resize(nt);  // reflect() helper only

  Real sup_wq = 0;
  for (int n = 0; n < nt; ++n) {
    std::array<const AmplitudeFrameSet*, 5> win;
    for (int o = -2; o <= 2; ++o) win[o + 2] = amps_at(probe.reflect(n + o));
    NodeWork nw =
        assemble_node(sp, js, win, n, t0 + h * n, h, grid, cfg);
    Field w = add(nw.wpc, nw.w_t);
    sup_wq = std::max(sup_wq, lp_norm(w, cfg.jets.q));
    out.w_c.frames.push_back(sub(nw.wpc, nw.w_p));
    out.w_c.dt_frames.push_back(nw.dt_wpc);  // dt of w_p + w_c (hybrid)
    out.w_t.frames.push_back(nw.w_t);
    out.w_t.dt_frames.push_back(nw.dt_wt);
    out.w_p.frames.push_back(std::move(nw.w_p));
  }
  out.kappa_star = sup_wq / std::sqrt(cfg.delta_m1);
  return out;
}

// ---------------------------------------------------------------------------
// stress assembly

StressOutputs build_new_stress(const StressInputs& in) {
  StressOutputs out;
  const Grid3& g = in.w_p.grid;
  Field w = add(in.wpc, in.w_t);
  Field w_c = sub(in.wpc, in.w_p);

  Field g_lin = in.dt_wpc;
  if (!w.is_zero()) axpy(g_lin, -in.nu, laplacian(w));
  g_lin = add(g_lin, add(div_outer(in.u_ell, w), div_outer(w, in.u_ell)));
  out.R_lin = antidivergence(g_lin);

  Field cplus = add(w_c, in.w_t);
  Field g_corr = add(div_outer(cplus, w), div_outer(in.w_p, cplus));
  out.R_corr = antidivergence(g_corr);

  out.P = in.rho_chi_sq;
  if (!in.Tg_dot.is_zero()) {
    Field pv = inv_laplacian(divergence(project_mean_free(in.Tg_dot)));
    scale(pv, 1.0 / in.mu);
    out.P = add(out.P, pv);
  }

  Field rhs = add(in.dt_wt, div_outer(in.w_p, in.w_p));
  if (!in.R_ell.is_zero()) rhs = add(rhs, divergence(in.R_ell));
  Field g_osc = rhs;
  if (!out.P.is_zero()) g_osc = sub(g_osc, grad(out.P));
  out.R_osc = antidivergence(g_osc);

  // defining identity of the oscillation stress, measured back honestly
  Field lhs = divergence(out.R_osc);
  if (!out.P.is_zero()) lhs = add(lhs, grad(out.P));
  const Real rhs_n = lp_norm(rhs, 2);
  out.ad90_rel = rhs_n > 0 ? lp_norm(sub(lhs, rhs), 2) / rhs_n
                           : lp_norm(lhs, 2);

  out.R_new = add(add(out.R_lin, out.R_corr), out.R_osc);
  out.p_new = in.p_ell.is_zero() && out.P.is_zero()
                  ? Field::zero(g, Rank::scalar)
                  : sub(in.p_ell, project_mean_free(out.P));
  return out;
}

// ---------------------------------------------------------------------------
// the step

namespace {

std::string fmt_real(Real v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string StepReport::to_csv() const {
  std::ostringstream os;
  os << "t,energy_new,energy_old,e,gap,rho0,residual_l2,residual_rel,"
        "div_u,u_linf,wp_lq,wc_lq,wt_lq,R_l1,e906_total,e906_target,"
        "e906_rel,cross_energy_rel,hi_freq_rel,ad90_rel,pumping_ok\n";
  for (const auto& r : nodes) {
    os << fmt_real(r.t) << ',' << fmt_real(r.energy_new) << ','
       << fmt_real(r.energy_old) << ',' << fmt_real(r.e) << ','
       << fmt_real(r.gap) << ',' << fmt_real(r.rho0) << ','
       << fmt_real(r.residual_l2) << ',' << fmt_real(r.residual_rel) << ','
       << fmt_real(r.div_u) << ',' << fmt_real(r.u_linf) << ','
       << fmt_real(r.wp_lq) << ',' << fmt_real(r.wc_lq) << ','
       << fmt_real(r.wt_lq) << ',' << fmt_real(r.R_l1) << ','
       << fmt_real(r.e906_total) << ',' << fmt_real(r.e906_target) << ','
       << fmt_real(r.e906_rel) << ',' << fmt_real(r.cross_energy_rel) << ','
       << fmt_real(r.hi_freq_rel) << ',' << fmt_real(r.ad90_rel) << ','
       << (r.pumping_ok ? 1 : 0) << '\n';
  }
  return os.str();
}

StepResult step(const IterationState& s, const StepConfig& cfg) {
  const int nt = s.u.nt();
  require(int(s.e_samples.size()) == nt, "step: e_samples size mismatch");
  const Grid3& grid = s.grid;
  const Real t0 = s.u.t0, t1 = s.u.t1;
  const Real h = (t1 - t0) / Real(nt - 1);

  StepResult res;
  StepReport& rep = res.report;

  MollifiedState ms = mollify_state(s, cfg);
  StressPartition sp = partition_stress(ms, s, cfg);
  rep.commutator_ct_l1 = ms.commutator_ct_l1;
  rep.i_max = sp.i_max;

  JetSet js = build_jet_set(cfg, sp.i_max);
  rep.disjoint_supports = js.disjoint;
  if (!js.disjoint)
    rep.notes.push_back("translation plan fallback: tube overlap possible");
  {
    const long long need = min_resolution(cfg.jets);
    if (grid.n < need)
      rep.notes.push_back("sampling under-resolved: min resolution " +
                          std::to_string(need) + " vs grid " +
                          std::to_string(grid.n));
  }
  // E86-style gauge floor, logged (asserted only in the asymptotic regime)
  {
    Real floor = 16.0 * sp.base;
    for (int n = 0; n < nt; ++n)
      if (sp.rho0[n] > 0 && sp.rho0[n] < floor) {
        std::string msg = "gauge floor margin negative at node " +
                          std::to_string(n) + ": rho0 = " +
                          fmt_real(sp.rho0[n]) + " < " + fmt_real(floor);
        if (cfg.assert_inductive) throw JfError(msg);
        rep.notes.push_back(msg);
        break;
      }
    for (int n = 0; n < nt; ++n)
      if (sp.chi0_sq[n] < 0.5 * grid.volume()) {
        rep.notes.push_back("support of chi_(0) below half volume at node " +
                            std::to_string(n));
        break;
      }
  }

  res.next.m = s.m + 1;
  res.next.ledger = s.ledger;
  res.next.e_samples = s.e_samples;
  res.next.grid = grid;
  res.next.u.t0 = res.next.R.t0 = res.next.p.t0 = t0;
  res.next.u.t1 = res.next.R.t1 = res.next.p.t1 = t1;

  std::map<int, AmplitudeFrameSet> cache;
  auto amps_at = [&](int n) -> const AmplitudeFrameSet* {
    auto it = cache.find(n);
    if (it == cache.end()) {
      it = cache.emplace(n, build_amplitudes(sp, ms, js, n, cfg, grid)).first;
      // keep the sliding window small
      while (cache.size() > 6) cache.erase(cache.begin());
    }
    return &it->second;
  };
  TimeField probe;
  probe.t0 = t0;
  probe.t1 = t1;
  probe.frames.resize(nt);

  const Real kappa_denom = std::sqrt(cfg.delta_m1);
  for (int n = 0; n < nt; ++n) {
    std::array<const AmplitudeFrameSet*, 5> win;
    for (int o = -2; o <= 2; ++o) win[o + 2] = amps_at(probe.reflect(n + o));
    NodeWork nw = assemble_node(sp, js, win, n, t0 + h * n, h, grid, cfg);

    StressInputs si;
    si.u_ell = ms.u.frames.empty() ? Field::zero(grid, Rank::vector3)
                                   : ms.u.frames[n];
    si.dt_u_ell = ms.u.dt_frames.empty() ? Field::zero(grid, Rank::vector3)
                                         : ms.u.dt_frames[n];
    si.R_ell = ms.R.frames.empty()
                   ? Field::zero(grid, Rank::symtensor3, true)
                   : ms.R.frames[n];
    si.p_ell = ms.p.frames.empty() ? Field::zero(grid, Rank::scalar)
                                   : ms.p.frames[n];
    si.w_p = nw.w_p;
    si.wpc = nw.wpc;
    si.w_t = nw.w_t;
    si.dt_wpc = nw.dt_wpc;
    si.dt_wt = nw.dt_wt;
    si.Tg_dot = nw.Tg_dot;
    si.rho_chi_sq = nw.rho_chi_sq;
    si.nu = cfg.nu;
    si.mu = cfg.jets.mu;
    StressOutputs so = build_new_stress(si);

    Field u1 = add(si.u_ell, add(nw.wpc, nw.w_t));
    Field dtu1 = add(si.dt_u_ell, add(nw.dt_wpc, nw.dt_wt));

    // honest residual of the new triple with the same discrete operators
    Field resid = dtu1;
    if (!u1.is_zero()) axpy(resid, -cfg.nu, laplacian(u1));
    resid = add(resid, div_outer(u1, u1));
    if (!so.p_new.is_zero()) resid = add(resid, grad(so.p_new));
    resid = sub(resid, divergence(so.R_new));

    StepNodeReport nr;
    nr.t = t0 + h * n;
    nr.e = s.e_samples[n];
    nr.energy_old = frame_energy(s.u.frames[n]);
    nr.energy_new = frame_energy(u1);
    nr.gap = nr.e - nr.energy_new;
    nr.rho0 = sp.rho0[n];
    nr.residual_l2 = lp_norm(resid, 2);
    nr.residual_l1 = lp_norm(resid, 1);
    nr.quadratic_scale = lp_norm(div_outer(u1, u1), 2);
    // normalize against the largest term entering the balance, so nodes where
    // everything is tiny do not inflate the relative residual
    Real ref = nr.quadratic_scale;
    ref = std::max(ref, lp_norm(dtu1, 2));
    if (!u1.is_zero()) ref = std::max(ref, cfg.nu * lp_norm(laplacian(u1), 2));
    if (!so.p_new.is_zero()) ref = std::max(ref, lp_norm(grad(so.p_new), 2));
    ref = std::max(ref, lp_norm(divergence(so.R_new), 2));
    nr.residual_rel = nr.residual_l2 / std::max(ref, kTinyFloor);
    nr.div_u = linf_norm(divergence(u1));
    for (Real m : field_mean(u1)) nr.mean_u = std::max(nr.mean_u, std::abs(m));
    nr.u_linf = linf_norm(u1);
    nr.wp_lq = lp_norm(nw.w_p, cfg.jets.q);
    nr.wc_lq = lp_norm(sub(nw.wpc, nw.w_p), cfg.jets.q);
    nr.wt_lq = lp_norm(nw.w_t, cfg.jets.q);
    nr.R_l1 = lp_norm(so.R_new, 1);
    nr.ad90_rel = so.ad90_rel;

    nr.e906_total = frame_energy(nw.w_p);
    nr.e906_target = 3.0 * sp.rho0[n] * sp.chi0_sq[n];
    for (int i = 1; i <= sp.i_max; ++i)
      nr.e906_target += 3.0 * sp.rho[i] * sp.chi_sq[i][n];
    nr.e906_rel = nr.e906_total > 0
                      ? std::abs(nr.e906_total - nr.e906_target) /
                            nr.e906_total
                      : 0.0;
    nr.cross_energy_rel =
        nr.e906_total > 0
            ? std::abs(nr.e906_total - nw.diag_energy) / nr.e906_total
            : 0.0;
    if (nr.e906_total > 0) {
      const long long om =
          js.active[cfg.family] ? js.omega[cfg.family] : js.omega[0];
      Field hi = project_high(nw.w_p, 0.5 * Real(om));
      nr.hi_freq_rel = frame_energy(hi) / nr.e906_total;
    }
    nr.pumping_ok = sp.rho0[n] <= 0.0 || nr.energy_new > nr.energy_old;

    Field w = add(nw.wpc, nw.w_t);
    rep.w_ct_lq = std::max(rep.w_ct_lq, lp_norm(w, cfg.jets.q));

    rep.residual_rel_max = std::max(rep.residual_rel_max, nr.residual_rel);
    rep.div_u_max = std::max(rep.div_u_max, nr.div_u);
    rep.e906_rel_max = std::max(rep.e906_rel_max, nr.e906_rel);
    rep.pumping_ok = rep.pumping_ok && nr.pumping_ok;
    rep.nodes.push_back(nr);

    if (cfg.keep_fields) {
      res.next.u.frames.push_back(std::move(u1));
      res.next.u.dt_frames.push_back(std::move(dtu1));
      res.next.R.frames.push_back(std::move(so.R_new));
      res.next.p.frames.push_back(std::move(so.p_new));
    } else {
      res.next.u.frames.push_back(Field::zero(grid, Rank::vector3));
      res.next.R.frames.push_back(Field::zero(grid, Rank::symtensor3, true));
      res.next.p.frames.push_back(Field::zero(grid, Rank::scalar));
    }
  }
  rep.kappa_measured = rep.w_ct_lq / kappa_denom;
  if (rep.kappa_measured > cfg.kappa_star) {
    std::string msg = "perturbation size margin negative: ||w||_{C_t L^q} = " +
                      fmt_real(rep.w_ct_lq) + " exceeds " +
                      fmt_real(cfg.kappa_star) + " delta^{1/2}";
    if (cfg.assert_inductive) throw JfError(msg);
    rep.notes.push_back(msg);
  }
  if (!cfg.keep_fields)
    rep.notes.push_back("output frames dropped (diagnostics-only run)");
  return res;
}

}  // namespace jetforge
