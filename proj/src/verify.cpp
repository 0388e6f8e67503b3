#include "jetforge/verify.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "jetforge/calculus.hpp"
#include "jetforge/fft.hpp"

namespace jetforge {

namespace {

constexpr Real kTiny = 1e-300;

std::string fmt_real(Real v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// least-squares line through (ln x, ln y); returns slope, exp(intercept)
// and the maximum log-space deviation from the fit
void fit_loglog(const std::vector<CheckPoint>& pts, Real& slope, Real& c0,
                Real& dev) {
  const int n = int(pts.size());
  Real sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& p : pts) {
    const Real x = std::log(p.x), y = std::log(std::max(p.measured, kTiny));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const Real b = (sy - slope * sx) / n;
  c0 = std::exp(b);
  dev = 0;
  for (const auto& p : pts) {
    const Real y = std::log(std::max(p.measured, kTiny));
    dev = std::max(dev, std::abs(y - (slope * std::log(p.x) + b)));
  }
}

Field pointwise_product(const Field& a, const Field& b) {
  require(a.rank == Rank::scalar && b.rank == Rank::scalar,
          "pointwise_product: scalar fields expected");
  Field out(a.grid, Rank::scalar);
  for (std::size_t m = 0; m < a.n3(); ++m)
    out.at(0, m) = a.at(0, m) * b.at(0, m);
  return out;
}

// manufactured exactly-solving state on smooth random data: p from the
// pressure identity and R closing the remaining defect by antidivergence
IterationState manufactured_state(const Grid3& g, int nt, Real amp, Real nu,
                                  std::uint64_t seed) {
  IterationState s =
      make_zero_state(g, 0.0, kTwoPi, nt, [](Real) { return 1.0; },
                      ParamLedger{});
  for (int n = 0; n < nt; ++n) {
    Field u = random_band_field(g, Rank::vector3, 4, seed, true);
    scale(u, amp * (1.0 + 0.3 * std::sin(s.u.time(n))));
    s.u.frames[n] = std::move(u);
  }
  TimeField du = dt_fd(s.u);
  for (int n = 0; n < nt; ++n) {
    const Field& u = s.u.frames[n];
    Field p = inv_laplacian(divergence(divergence(
        sub(Field::zero(g, Rank::symtensor3, true), outer_sym(u, false)))));
    Field defect = du.frames[n];
    axpy(defect, -nu, laplacian(u));
    defect = add(defect, div_outer(u, u));
    defect = add(defect, grad(p));
    s.R.frames[n] = antidivergence(defect);
    s.p.frames[n] = std::move(p);
    const Real en = lp_norm(u, 2);
    s.e_samples[n] = en * en + 1.0;
  }
  s.u.dt_frames = du.frames;
  return s;
}

}  // namespace

Field random_band_field(const Grid3& g, Rank rank, int k_max,
                        std::uint64_t seed, bool solenoidal) {
  Rng rng(seed);
  Field white(g, rank);
  for (int c = 0; c < white.comps(); ++c) {
    Real* d = white.comp(c);
    for (std::size_t m = 0; m < g.n3(); ++m) d[m] = rng.normal();
  }
  auto spec = fft_forward_all(white);
  for (auto& s : spec) {
    for_each_mode(g, [&](std::size_t m, int kx, int ky, int kz) {
      const Real k2 = Real(kx * kx + ky * ky + kz * kz);
      if (k2 == 0.0 || k2 > Real(k_max) * k_max)
        s[m] = Cplx(0, 0);
      else
        s[m] /= k2;
    });
  }
  Field f = fft_backward_all(g, rank, spec);
  if (solenoidal) {
    require(rank == Rank::vector3, "random_band_field: solenoidal is vector3");
    f = leray(project_mean_free(f));
  }
  // normalize to unit L2 so constants are comparable across seeds
  const Real n2 = lp_norm(f, 2);
  if (n2 > 0) scale(f, 1.0 / n2);
  return f;
}

// ---------------------------------------------------------------------------
// residual

std::vector<ResidualNode> nsr_residual(const TimeField& u, const TimeField& R,
                                       const TimeField& p, Real nu) {
  const int nt = u.nt();
  require(nt >= 5, "nsr_residual: at least 5 time nodes required");
  require(R.nt() == nt && p.nt() == nt, "nsr_residual: frame count mismatch");
  const std::vector<Field>* du = &u.dt_frames;
  TimeField fd;
  if (!u.has_dt()) {
    fd = dt_fd(u);
    du = &fd.frames;
  }
  std::vector<ResidualNode> out;
  out.reserve(nt);
  for (int n = 0; n < nt; ++n) {
    const Field& un = u.frames[n];
    Field resid = (*du)[n];
    Real ref = lp_norm(resid, 2);
    if (!un.is_zero()) {
      Field lap = laplacian(un);
      ref = std::max(ref, nu * lp_norm(lap, 2));
      axpy(resid, -nu, lap);
      Field quad = div_outer(un, un);
      ref = std::max(ref, lp_norm(quad, 2));
      resid = add(resid, quad);
    }
    if (!p.frames[n].is_zero()) {
      Field gp = grad(p.frames[n]);
      ref = std::max(ref, lp_norm(gp, 2));
      resid = add(resid, gp);
    }
    if (!R.frames[n].is_zero()) {
      Field dR = divergence(R.frames[n]);
      ref = std::max(ref, lp_norm(dR, 2));
      resid = sub(resid, dR);
    }
    ResidualNode rn;
    rn.t = u.time(n);
    rn.l2 = lp_norm(resid, 2);
    rn.l1 = lp_norm(resid, 1);
    rn.ref = ref;
    rn.rel = rn.l2 / std::max(ref, kTiny);
    out.push_back(rn);
  }
  return out;
}

// ---------------------------------------------------------------------------
// shell flux

std::vector<ShellFlux> shell_flux_analysis(const Field& u, Real nu,
                                           int max_shell) {
  require(u.rank == Rank::vector3, "shell_flux_analysis: vector3 expected");
  std::vector<ShellFlux> out;
  Field quad = u.is_zero() ? Field::zero(u.grid, Rank::vector3)
                           : div_outer(u, u);
  for (int j = 0; j <= max_shell; ++j) {
    ShellFlux sf;
    sf.shell = j;
    if (!u.is_zero()) {
      Field v = lp_shell(u, j);
      sf.linear = -nu * l2_inner(v, laplacian(v));
      sf.nonlinear = l2_inner(v, lp_shell(quad, j));
      sf.ratio = sf.linear > 0 ? std::abs(sf.nonlinear) / sf.linear : 0.0;
    }
    out.push_back(sf);
  }
  return out;
}

std::vector<ShellFlux> shell_flux_analysis(const TimeField& u, Real nu,
                                           int max_shell) {
  std::vector<ShellFlux> acc(max_shell + 1);
  for (int j = 0; j <= max_shell; ++j) acc[j].shell = j;
  for (const Field& f : u.frames) {
    auto table = shell_flux_analysis(f, nu, max_shell);
    for (int j = 0; j <= max_shell; ++j) {
      acc[j].linear += table[j].linear / u.nt();
      acc[j].nonlinear += table[j].nonlinear / u.nt();
    }
  }
  for (auto& sf : acc)
    sf.ratio = sf.linear > 0 ? std::abs(sf.nonlinear) / sf.linear : 0.0;
  return acc;
}

// ---------------------------------------------------------------------------
// estimate sweeps

const char* estimate_name(EstimateName name) {
  switch (name) {
    case EstimateName::commutator: return "commutator";
    case EstimateName::improved_holder: return "improved_holder";
    case EstimateName::inverse_gain: return "inverse_gain";
    case EstimateName::jet_scaling: return "jet_scaling";
    case EstimateName::amplitude_bounds: return "amplitude_bounds";
    case EstimateName::mollified_stress: return "mollified_stress";
  }
  return "unknown";
}

namespace {

CheckReport check_commutator(const EstimateConfig& cfg, std::uint64_t seed) {
  CheckReport rep;
  rep.bound_form = "C ell^2 ||f||_C1 ||g||_C1";
  rep.expected_exponent = 2.0;
  // the ell^2 law is asymptotic in ell * k_max: low modes, small radii, and
  // a grid fine enough that the smallest kernel still spans several cells
  Grid3 g{std::max(cfg.grid_n, 128)};
  Field f = random_band_field(g, Rank::scalar, 2, seed);
  Field h = random_band_field(g, Rank::scalar, 2, seed + 1);
  Field fh = pointwise_product(f, h);
  Real ell = 0.4;
  const int npts = std::min(cfg.sweep, 3);
  for (int j = 0; j < npts; ++j, ell *= 0.5) {
    MollifierSpec spec{ell, 3};
    Field lhs = mollify_space(fh, spec);
    Field rhs = pointwise_product(mollify_space(f, spec),
                                  mollify_space(h, spec));
    rep.points.push_back({ell, linf_norm(sub(lhs, rhs))});
  }
  fit_loglog(rep.points, rep.fitted_exponent, rep.fitted_constant,
             rep.confidence);
  rep.exponent_dev = std::abs(rep.fitted_exponent - rep.expected_exponent);
  rep.pass = rep.exponent_dev <= 0.15;
  return rep;
}

CheckReport check_improved_holder(const EstimateConfig& cfg,
                                  std::uint64_t seed) {
  CheckReport rep;
  rep.bound_form = "C lambda^{-1/p} (p-th root of the p-th-power defect)";
  rep.expected_exponent = -1.0 / cfg.p;
  // The defect |int F(x) h(lambda x) - avg(F) avg(h)| pairs the spectrum of
  // the slow p-th power F against the dilated fast content at frequencies
  // lambda*k.  A smooth band-limited F superconverges on the torus, so we
  // saturate the C^1 borderline instead: plant an exact 1/k cosine envelope
  // in F along x1, which makes the defect scale as 1/lambda and its p-th
  // root as lambda^{-1/p}.  A small seed-dependent part band-limited to
  // modes <= 3 cannot reach any paired frequency (the fast factor's even
  // x1-harmonics put those at 2*lambda >= 4), so it leaves the slope alone.
  Grid3 g{std::max(cfg.grid_n, 128)};
  const int k_cap = 40;
  const Real env_amp = 0.15;
  Field F = sample_field(g, Rank::scalar, [&](Real x, Real, Real, int) {
    Real s = 1.0;
    for (int k = 2; k <= k_cap; ++k) s += env_amp * std::cos(k * x) / Real(k);
    return s;
  });
  Field r = random_band_field(g, Rank::scalar, 3, seed);
  axpy(F, 0.05 / (1.0 + linf_norm(r)), r);
  Real f_min = F.at(0, 0);
  for (std::size_t m = 0; m < g.n3(); ++m) f_min = std::min(f_min, F.at(0, m));
  require(f_min > 0.0, "improved Hoelder sweep: slow p-th power not positive");
  const Real fp = integral(F);
  auto osc = [](Real x, Real y, Real z) {
    return 1.0 + 0.6 * std::sin(x + 0.7) * std::cos(y) + 0.3 * std::sin(2 * z);
  };
  const Real cell = g.box * g.box * g.box / Real(g.n3());
  Real lam = 1;
  const int npts = std::min(cfg.sweep, 4);
  for (int j = 0; j < npts; ++j) {
    lam *= 2;
    Real prod = 0, gp_avg = 0;
    for (int iz = 0; iz < g.n; ++iz)
      for (int iy = 0; iy < g.n; ++iy)
        for (int ix = 0; ix < g.n; ++ix) {
          const Real x = g.box * Real(ix) / Real(g.n);
          const Real y = g.box * Real(iy) / Real(g.n);
          const Real z = g.box * Real(iz) / Real(g.n);
          const Real hp =
              std::pow(std::abs(osc(lam * x, lam * y, lam * z)), cfg.p);
          gp_avg += hp;
          prod += F.at(0, g.idx(ix, iy, iz)) * hp;
        }
    gp_avg /= Real(g.n3());
    prod *= cell;
    rep.points.push_back(
        {lam, std::pow(std::abs(prod - fp * gp_avg), 1.0 / cfg.p)});
  }
  fit_loglog(rep.points, rep.fitted_exponent, rep.fitted_constant,
             rep.confidence);
  rep.exponent_dev = std::abs(rep.fitted_exponent - rep.expected_exponent);
  rep.pass = rep.exponent_dev <= 0.15;
  return rep;
}

CheckReport check_inverse_gain(const EstimateConfig& cfg, std::uint64_t seed) {
  CheckReport rep;
  rep.bound_form = "||R P_{>=kappa} f||_L2 <= C kappa^{-1} ||P_{>=kappa} f||_L2";
  rep.expected_exponent = -1.0;
  Grid3 g{cfg.grid_n};
  Field f = random_band_field(g, Rank::vector3, (7 * cfg.grid_n) / 16, seed);
  Real kappa = 1;
  for (int j = 0; j < cfg.sweep; ++j) {
    kappa *= 2;
    Field hi = project_high(f, kappa);
    const Real denom = lp_norm(hi, 2);
    rep.points.push_back(
        {kappa, lp_norm(antidivergence(hi), 2) / std::max(denom, kTiny)});
  }
  fit_loglog(rep.points, rep.fitted_exponent, rep.fitted_constant,
             rep.confidence);
  rep.exponent_dev = std::abs(rep.fitted_exponent - rep.expected_exponent);
  rep.pass = rep.exponent_dev <= 0.15;
  return rep;
}

CheckReport check_jet_scaling(const EstimateConfig& cfg, std::uint64_t) {
  CheckReport rep;
  rep.bound_form = "||grad W||_{L^q} ~ lambda (first-derivative exponent)";
  rep.expected_exponent = 1.0;
  Profiles prof = make_profiles(cfg.q);
  DirectionFrame f;
  f.zeta = RVec3{Rat(0), Rat(0), Rat(1)};
  f.a = RVec3{Rat(1), Rat(0), Rat(0)};
  f.c = RVec3{Rat(0), Rat(1), Rat(0)};
  f.den = 1;
  std::vector<ScalingPoint> sched;
  Real lam = 8;
  for (int j = 0; j < std::max(cfg.sweep, 3); ++j, lam *= 2)
    sched.push_back({lam, 2.0 / lam, 4.0 / lam, lam});
  ScalingReport sr = verify_scaling(f, prof, 1, cfg.q, 0, 1, sched, 0.15);
  rep.expected_exponent = sr.expected;
  rep.fitted_exponent = sr.slope;
  for (std::size_t j = 0; j < sr.norms.size(); ++j)
    rep.points.push_back({sched[j].lambda, sr.norms[j]});
  Real slope_chk, c0, dev;
  fit_loglog(rep.points, slope_chk, c0, dev);
  rep.fitted_constant = c0;
  rep.confidence = dev;
  rep.exponent_dev = std::abs(rep.fitted_exponent - rep.expected_exponent);
  rep.pass = sr.ok;
  return rep;
}

StepConfig desk_step_config(const EstimateConfig& cfg, int nt) {
  StepConfig sc;
  sc.jets.lambda = 4.0;
  sc.jets.sigma = 0.25;
  sc.jets.r = 0.5;
  sc.jets.mu = 4.0;
  sc.jets.n_lambda = 5;
  sc.jets.q = cfg.q;
  const Real dt = kTwoPi / Real(nt - 1);
  sc.moll.ell = std::min(2.05 * dt, 0.41);
  return sc;
}

CheckReport check_amplitude_bounds(const EstimateConfig& cfg,
                                   std::uint64_t) {
  CheckReport rep;
  rep.bound_form =
      "||a_(zeta)||_{L^p} <= C 2^{(p-2)i/p} delta_{m+1}^{1/2} lambda_m^{-eps}";
  Grid3 g{std::min(cfg.grid_n, 32)};
  const int nt = 9;
  StepConfig sc = desk_step_config(cfg, nt);
  IterationState s = make_zero_state(
      g, 0.0, kTwoPi, nt, [](Real t) { return 1.0 - std::cos(t); },
      ParamLedger{});
  MollifiedState ms = mollify_state(s, sc);
  StressPartition sp = partition_stress(ms, s, sc);
  JetSet js = build_jet_set(sc, sp.i_max);
  const Real scale_ref =
      std::sqrt(sc.delta_m1) * std::pow(sc.lambda_m, -sc.eps);
  Real worst = 0;
  for (int n = 0; n < nt; ++n) {
    if (sp.rho0[n] <= 0) continue;
    AmplitudeFrameSet amps = build_amplitudes(sp, ms, js, n, sc, g);
    for (const auto& e : amps.entries) {
      const Real shell = std::pow(2.0, (cfg.p - 2.0) * e.i / cfg.p);
      Real norm;
      if (e.a.is_const)
        norm = std::abs(e.a.c) * std::pow(g.volume(), 1.0 / cfg.p);
      else
        norm = lp_norm(e.a.f, cfg.p);
      worst = std::max(worst, norm / (shell * scale_ref));
    }
    rep.points.push_back({Real(n + 1), worst});
  }
  rep.fitted_constant = worst;
  rep.pass = worst > 0;  // informational: constant reported, not asserted
  return rep;
}

CheckReport check_mollified_stress(const EstimateConfig& cfg,
                                   std::uint64_t seed) {
  CheckReport rep;
  rep.bound_form = "||R_ell||_{C_t L1} <= 2 ||R||_{C_t L1}";
  Grid3 g{std::min(cfg.grid_n, 32)};
  const int nt = 9;
  StepConfig sc = desk_step_config(cfg, nt);
  IterationState s = manufactured_state(g, nt, 1e-2, sc.nu, seed);
  Real base = 0;
  for (const Field& R : s.R.frames) base = std::max(base, lp_norm(R, 1));
  Real ell = 0.8;
  bool ok = true;
  for (int j = 0; j < cfg.sweep; ++j, ell *= 0.5) {
    StepConfig sj = sc;
    sj.moll.ell = ell;
    MollifiedState ms = mollify_state(s, sj);
    Real ml1 = 0;
    for (const Field& R : ms.R.frames) ml1 = std::max(ml1, lp_norm(R, 1));
    rep.points.push_back({ell, ml1 / std::max(base, kTiny)});
    ok = ok && ml1 <= 2.0 * base;
  }
  rep.fitted_constant = base;
  rep.pass = ok;  // informational: doubling margin of the inductive bound
  return rep;
}

}  // namespace

CheckReport estimate_check(EstimateName name, const EstimateConfig& cfg,
                           std::uint64_t seed) {
  require(cfg.sweep >= 3, "estimate_check: sweep needs at least 3 points");
  CheckReport rep;
  switch (name) {
    case EstimateName::commutator: rep = check_commutator(cfg, seed); break;
    case EstimateName::improved_holder:
      rep = check_improved_holder(cfg, seed);
      break;
    case EstimateName::inverse_gain:
      rep = check_inverse_gain(cfg, seed);
      break;
    case EstimateName::jet_scaling: rep = check_jet_scaling(cfg, seed); break;
    case EstimateName::amplitude_bounds:
      rep = check_amplitude_bounds(cfg, seed);
      break;
    case EstimateName::mollified_stress:
      rep = check_mollified_stress(cfg, seed);
      break;
  }
  rep.id = estimate_name(name);
  rep.seed = seed;
  rep.exact_check = false;
  return rep;
}

std::string CheckReport::to_csv() const {
  std::ostringstream os;
  os << "x,measured\n";
  for (const auto& p : points)
    os << fmt_real(p.x) << ',' << fmt_real(p.measured) << '\n';
  return os.str();
}

std::string summary_csv(const std::vector<CheckReport>& reports) {
  std::ostringstream os;
  os << "check,seed,verdict,fitted_exponent,expected_exponent,deviation,"
        "fitted_constant,confidence\n";
  for (const auto& r : reports) {
    const bool info = r.id == "amplitude_bounds" || r.id == "mollified_stress";
    const char* verdict = info ? "info" : (r.pass ? "pass" : "fail");
    os << r.id << ',' << r.seed << ',' << verdict << ','
       << fmt_real(r.fitted_exponent) << ',' << fmt_real(r.expected_exponent)
       << ',' << fmt_real(r.exponent_dev) << ',' << fmt_real(r.fitted_constant)
       << ',' << fmt_real(r.confidence) << '\n';
  }
  return os.str();
}

}  // namespace jetforge
