// Command-line surface for the pipeline: parameter feasibility, jet
// construction and scaling checks, stress decomposition, the iteration step,
// residual and shell diagnostics, estimate sweeps, and field export.
//
// Exit codes: 0 success, 1 check failure, 2 configuration error,
// 3 resolution/feasibility/I-O error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "jetforge/calculus.hpp"
#include "jetforge/geometry.hpp"
#include "jetforge/io.hpp"
#include "jetforge/iteration.hpp"
#include "jetforge/jets.hpp"
#include "jetforge/params.hpp"
#include "jetforge/verify.hpp"

namespace {

using namespace jetforge;

constexpr int kOk = 0, kCheckFail = 1, kConfigError = 2, kResourceError = 3;

DirectionFrame axis_frame() {
  DirectionFrame f;
  f.zeta = RVec3{Rat(0), Rat(0), Rat(1)};
  f.a = RVec3{Rat(1), Rat(0), Rat(0)};
  f.c = RVec3{Rat(0), Rat(1), Rat(0)};
  f.den = 1;
  return f;
}

struct CommonOpts {
  std::string config_path;
  std::string preset = "identity_scale";
  std::string out_dir = ".";
};

void add_common(CLI::App* cmd, CommonOpts& c) {
  cmd->add_option("--config", c.config_path, "run configuration file");
  cmd->add_option("--preset", c.preset,
                  "desk preset when no config is given "
                  "(identity_scale | tiny | micro)");
  cmd->add_option("--out", c.out_dir, "output directory");
}

// preset jets come in two forms; the iteration needs the family-frame one
RunConfig config_for(const CommonOpts& c, bool family_form = true) {
  if (!c.config_path.empty()) return load_run_config(c.config_path);
  DeskPreset p = desk_preset(preset_from_string(c.preset));
  RunConfig rc;
  rc.ledger = p.ledger;
  rc.jets = family_form ? p.jets_iteration : p.jets;
  rc.family = p.family;
  rc.grid_n = p.grid_n;
  rc.n_t = p.n_t;
  rc.T = p.ledger.T;
  return rc;
}

StepConfig step_config_from(const RunConfig& rc) {
  StepConfig sc;
  sc.jets = rc.jets;
  sc.family = rc.family;
  if (rc.ledger.nu > 0) sc.nu = rc.ledger.nu;
  if (rc.ledger.eps > 0) sc.eps = rc.ledger.eps;
  const Real dt = rc.T / Real(rc.n_t - 1);
  sc.moll.ell = std::min(2.05 * dt, 0.41);
  sc.keep_fields = true;
  return sc;
}

std::string out_path(const CommonOpts& c, const std::string& name) {
  std::filesystem::create_directories(c.out_dir);
  return (std::filesystem::path(c.out_dir) / name).string();
}

// configuration problems exit 2; everything after that exits 3 on error
int with_config(const CommonOpts& c, bool family_form,
                const std::function<int(const RunConfig&)>& body) {
  RunConfig rc;
  try {
    rc = config_for(c, family_form);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kConfigError;
  }
  try {
    return body(rc);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kResourceError;
  }
}

// ---------------------------------------------------------------------------
// subcommands

int cmd_params_check(const CommonOpts& c) {
  return with_config(c, true, [&](const RunConfig& rc) {
    FeasibilityReport rep = check_feasibility(rc.ledger);
    write_text_file(out_path(c, "feasibility.csv"), rep.to_csv());
    IntegralityWitness w = az90_witness(rc.ledger);
    std::printf("constraints: %zu, all satisfied: %s\n", rep.items.size(),
                rep.ok ? "yes" : "no");
    std::printf("integrality witness: %s path, integral: %s, value %s\n",
                w.exact_path ? "exact" : "float", w.integral ? "yes" : "no",
                fmt_real17(w.value).c_str());
    for (const auto& it : rep.items)
      if (!it.satisfied)
        std::printf("violated: %s (margin %s)\n", it.name.c_str(),
                    fmt_real17(it.margin).c_str());
    return rep.ok ? kOk : kCheckFail;
  });
}

int cmd_params_search(const CommonOpts& c, long long resolution) {
  try {
    SearchBox box;  // the documented default box
    SearchResult res = search_admissible(box, resolution);
    std::ostringstream led;
    led << "a,b,beta,q,A,eps,nu,p_aux,T,e_max\n";
    for (const auto& l : res.admissible)
      led << fmt_real17(l.a) << "," << fmt_real17(l.b) << ","
          << fmt_real17(l.beta) << "," << fmt_real17(l.q) << ","
          << fmt_real17(l.A) << "," << fmt_real17(l.eps) << ","
          << fmt_real17(l.nu) << "," << fmt_real17(l.p_aux) << ","
          << fmt_real17(l.T) << "," << fmt_real17(l.e_max) << "\n";
    write_text_file(out_path(c, "admissible.csv"), led.str());
    std::ostringstream hist;
    hist << "constraint,count\n";
    for (const auto& [name, count] : res.binding)
      hist << csv_quote(name) << "," << count << "\n";
    write_text_file(out_path(c, "binding.csv"), hist.str());
    std::printf("scanned %lld points, %zu admissible\n", res.points_scanned,
                res.admissible.size());
    return res.admissible.empty() ? kCheckFail : kOk;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kResourceError;
  }
}

int cmd_jets_build(const CommonOpts& c, Real t) {
  return with_config(c, /*family_form=*/false, [&](const RunConfig& rc) {
    validate_jet_params(rc.jets);
    Profiles prof = make_profiles(
        rc.jets.q, rc.profile_shape == "gaussian_truncated"
                       ? ProfileShape::gaussian_truncated
                       : ProfileShape::poly_bump);
    Jet jet(axis_frame(), rc.jets, prof, {0, 0, 0});
    Grid3 g{int(rc.grid_n)};
    JetFields jf = build_jet(jet, g, t, /*allow_underresolved=*/true);
    for (const auto& fmt : rc.output.formats) {
      ExportFormat ef = export_format_from_string(fmt);
      export_field(out_path(c, std::string("jet_W.") +
                                   (ef == ExportFormat::pf1 ? "pf1"
                                    : ef == ExportFormat::vtk_legacy ? "vtk"
                                                                     : "csv")),
                   jf.W, ef);
    }
    std::printf("||W||_q (grid) = %s, ||W||_q (profile) = %s\n",
                fmt_real17(lp_norm(jf.W, rc.jets.q)).c_str(),
                fmt_real17(jet_lp_norm(jet, rc.jets.q)).c_str());
    return kOk;
  });
}

int cmd_jets_verify(const CommonOpts& c, Real p, int j, int k, int sweep) {
  try {
    Profiles prof = make_profiles(p > 2 ? p : 2.5);
    std::vector<ScalingPoint> sched;
    Real lam = 8;
    for (int i = 0; i < std::max(sweep, 3); ++i, lam *= 2)
      sched.push_back({lam, 2.0 / lam, 4.0 / lam, lam});
    ScalingReport sr =
        verify_scaling(axis_frame(), prof, 1, p, j, k, sched, 0.15);
    std::ostringstream os;
    os << "lambda,norm\n";
    for (std::size_t i = 0; i < sr.norms.size(); ++i)
      os << fmt_real17(sched[i].lambda) << "," << fmt_real17(sr.norms[i])
         << "\n";
    write_text_file(out_path(c, "jet_scaling.csv"), os.str());
    std::printf("fitted slope %s, expected %s: %s\n",
                fmt_real17(sr.slope).c_str(), fmt_real17(sr.expected).c_str(),
                sr.ok ? "pass" : "FAIL");
    return sr.ok ? kOk : kCheckFail;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kResourceError;
  }
}

int cmd_decompose(const std::string& matrix, int family) {
  std::array<Real, 9> R{};
  if (matrix == "id") {
    R = {1, 0, 0, 0, 1, 0, 0, 0, 1};
  } else {
    std::istringstream is(matrix);
    std::string tok;
    int i = 0;
    while (std::getline(is, tok, ',') && i < 9) R[i++] = std::stod(tok);
    if (i != 9) {
      std::fprintf(stderr,
                   "configuration error: --matrix wants 'id' or 9 "
                   "comma-separated entries\n");
      return kConfigError;
    }
  }
  try {
    DirectionSet set = make_direction_set();
    std::array<Real, 6> gamma = decompose_matrix(set, family, R);
    std::array<Real, 9> rec{};
    for (int k = 0; k < 6; ++k) {
      auto z = set.family[std::size_t(family)][std::size_t(k)].zeta.dbl();
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
          rec[std::size_t(3 * a + b)] += gamma[std::size_t(k)] *
                                         gamma[std::size_t(k)] * z[std::size_t(a)] *
                                         z[std::size_t(b)];
    }
    Real resid = 0;
    for (int i = 0; i < 9; ++i)
      resid += (rec[std::size_t(i)] - R[std::size_t(i)]) *
               (rec[std::size_t(i)] - R[std::size_t(i)]);
    resid = std::sqrt(resid);
    for (int k = 0; k < 6; ++k)
      std::printf("gamma_%d = %s\n", k, fmt_real17(gamma[std::size_t(k)]).c_str());
    std::printf("reconstruction residual = %s\n", fmt_real17(resid).c_str());
    return kOk;
  } catch (const std::exception& e) {
    // outside the certified ball: a failed check, not a crash
    std::fprintf(stderr, "decomposition failed: %s\n", e.what());
    return kCheckFail;
  }
}

IterationState run_steps(const RunConfig& rc, const CommonOpts& c, int steps,
                         StepConfig& sc) {
  sc = step_config_from(rc);
  Grid3 g{int(rc.grid_n)};
  IterationState s = make_zero_state(g, 0.0, rc.T, int(rc.n_t),
                                     energy_function(rc.energy), rc.ledger);
  for (int i = 0; i < steps; ++i) {
    StepResult res = step(s, sc);
    write_text_file(
        out_path(c, "step_" + std::to_string(s.m) + "_report.csv"),
        res.report.to_csv());
    std::printf("step %lld: residual_rel_max %s, div_u_max %s, pumping %s\n",
                s.m, fmt_real17(res.report.residual_rel_max).c_str(),
                fmt_real17(res.report.div_u_max).c_str(),
                res.report.pumping_ok ? "ok" : "VIOLATED");
    s = std::move(res.next);
  }
  return s;
}

int cmd_iterate(const CommonOpts& c, int steps) {
  return with_config(c, true, [&](const RunConfig& rc) {
    StepConfig sc;
    IterationState s = run_steps(rc, c, steps, sc);
    const Field& u_last = s.u.frames.back();
    for (const auto& fmt : rc.output.formats) {
      ExportFormat ef = export_format_from_string(fmt);
      export_field(out_path(c, std::string("u_final.") +
                                   (ef == ExportFormat::pf1 ? "pf1"
                                    : ef == ExportFormat::vtk_legacy ? "vtk"
                                                                     : "csv")),
                   u_last, ef);
    }
    return kOk;
  });
}

int cmd_residual(const CommonOpts& c, int steps, Real tol) {
  return with_config(c, true, [&](const RunConfig& rc) {
    StepConfig sc;
    IterationState s = run_steps(rc, c, steps, sc);
    std::vector<ResidualNode> nodes = nsr_residual(s.u, s.R, s.p, sc.nu);
    std::ostringstream os;
    os << "t,l2,l1,ref,rel\n";
    Real worst = 0;
    for (const auto& nd : nodes) {
      os << fmt_real17(nd.t) << "," << fmt_real17(nd.l2) << ","
         << fmt_real17(nd.l1) << "," << fmt_real17(nd.ref) << ","
         << fmt_real17(nd.rel) << "\n";
      worst = std::max(worst, nd.rel);
    }
    write_text_file(out_path(c, "residual.csv"), os.str());
    std::printf("max relative residual = %s (tolerance %s)\n",
                fmt_real17(worst).c_str(), fmt_real17(tol).c_str());
    return worst <= tol ? kOk : kCheckFail;
  });
}

int cmd_shells(const CommonOpts& c, int steps, int max_shell) {
  return with_config(c, true, [&](const RunConfig& rc) {
    StepConfig sc;
    IterationState s = run_steps(rc, c, steps, sc);
    std::vector<ShellFlux> table = shell_flux_analysis(s.u, sc.nu, max_shell);
    std::ostringstream os;
    os << "shell,linear,nonlinear,ratio\n";
    for (const auto& sf : table)
      os << sf.shell << "," << fmt_real17(sf.linear) << ","
         << fmt_real17(sf.nonlinear) << "," << fmt_real17(sf.ratio) << "\n";
    write_text_file(out_path(c, "shells.csv"), os.str());
    return kOk;
  });
}

int cmd_checks(const CommonOpts& c, std::uint64_t seed, int grid_n, int sweep,
               Real p, const std::string& only) {
  try {
    EstimateConfig cfg;
    cfg.grid_n = grid_n;
    cfg.sweep = sweep;
    cfg.p = p;
    cfg.q = p;
    std::vector<CheckReport> reports;
    bool all_ok = true;
    for (EstimateName name :
         {EstimateName::commutator, EstimateName::improved_holder,
          EstimateName::inverse_gain, EstimateName::jet_scaling,
          EstimateName::amplitude_bounds, EstimateName::mollified_stress}) {
      if (!only.empty() && only != estimate_name(name)) continue;
      CheckReport rep = estimate_check(name, cfg, seed);
      write_text_file(
          out_path(c, std::string("check_") + estimate_name(name) + ".csv"),
          rep.to_csv());
      const bool info = name == EstimateName::amplitude_bounds ||
                        name == EstimateName::mollified_stress;
      std::printf("%s: %s (fitted %s, expected %s)\n", estimate_name(name),
                  info ? "info" : (rep.pass ? "pass" : "FAIL"),
                  fmt_real17(rep.fitted_exponent).c_str(),
                  fmt_real17(rep.expected_exponent).c_str());
      if (!info) all_ok = all_ok && rep.pass;
      reports.push_back(std::move(rep));
    }
    if (reports.empty()) {
      std::fprintf(stderr, "configuration error: unknown check '%s'\n",
                   only.c_str());
      return kConfigError;
    }
    write_text_file(out_path(c, "summary.csv"), summary_csv(reports));
    return all_ok ? kOk : kCheckFail;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kResourceError;
  }
}

int cmd_export(const std::string& in, const std::string& out,
               const std::string& format) {
  ExportFormat ef;
  try {
    ef = export_format_from_string(format);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kConfigError;
  }
  try {
    export_field(out, read_pf1(in), ef);
    return kOk;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kResourceError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "jetforge: intermittent-jet convex integration for the "
      "Navier-Stokes-Reynolds system"};
  app.require_subcommand(1);
  int code = kOk;

  CommonOpts pc;
  auto* s_pc = app.add_subcommand("params-check",
                                  "evaluate every admissibility constraint");
  add_common(s_pc, pc);
  s_pc->callback([&] { code = cmd_params_check(pc); });

  CommonOpts ps;
  long long resolution = 4;
  std::string box_name = "default";
  auto* s_ps = app.add_subcommand("params-search",
                                  "scan the default box for admissible "
                                  "ledgers");
  s_ps->add_option("--box", box_name, "search box (only 'default')");
  s_ps->add_option("--resolution", resolution, "grid points per axis");
  s_ps->add_option("--out", ps.out_dir, "output directory");
  s_ps->callback([&] {
    code = box_name == "default" ? cmd_params_search(ps, resolution)
                                 : kConfigError;
    if (box_name != "default")
      std::fprintf(stderr, "configuration error: unknown box '%s'\n",
                   box_name.c_str());
  });

  CommonOpts jb;
  Real jet_time = 0.0;
  auto* s_jb = app.add_subcommand("jets-build",
                                  "sample one axis-frame jet and export it");
  add_common(s_jb, jb);
  s_jb->add_option("--time", jet_time, "sampling time");
  s_jb->callback([&] { code = cmd_jets_build(jb, jet_time); });

  CommonOpts jv;
  Real jv_p = 2.5;
  int jv_j = 0, jv_k = 1, jv_sweep = 3;
  auto* s_jv = app.add_subcommand("jets-verify",
                                  "jet-norm scaling across frequency "
                                  "doublings");
  s_jv->add_option("--p", jv_p, "Lebesgue exponent");
  s_jv->add_option("--dt-order", jv_j, "time-derivative order");
  s_jv->add_option("--grad-order", jv_k, "axis-gradient order");
  s_jv->add_option("--sweep", jv_sweep, "number of doublings");
  s_jv->add_option("--out", jv.out_dir, "output directory");
  s_jv->callback([&] { code = cmd_jets_verify(jv, jv_p, jv_j, jv_k, jv_sweep); });

  std::string matrix = "id";
  int family = 0;
  auto* s_dc = app.add_subcommand("decompose",
                                  "decompose a near-identity matrix over one "
                                  "direction family");
  s_dc->add_option("--matrix", matrix, "'id' or 9 comma-separated entries");
  s_dc->add_option("--family", family, "direction family (0 or 1)");
  s_dc->callback([&] { code = cmd_decompose(matrix, family); });

  CommonOpts it;
  int steps = 1;
  auto* s_it = app.add_subcommand("iterate",
                                  "run convex-integration steps from the "
                                  "zero state");
  add_common(s_it, it);
  s_it->add_option("--steps", steps, "number of steps");
  s_it->callback([&] { code = cmd_iterate(it, steps); });

  CommonOpts rs;
  int rs_steps = 1;
  Real rs_tol = 1e-5;
  auto* s_rs = app.add_subcommand("residual",
                                  "momentum-balance residual of an iterated "
                                  "state");
  add_common(s_rs, rs);
  s_rs->add_option("--steps", rs_steps, "steps before measuring");
  s_rs->add_option("--tol", rs_tol, "max relative residual for exit 0");
  s_rs->callback([&] { code = cmd_residual(rs, rs_steps, rs_tol); });

  CommonOpts sh;
  int sh_steps = 1, max_shell = 5;
  auto* s_sh = app.add_subcommand("shells",
                                  "dyadic shell energy-flux table of an "
                                  "iterated state");
  add_common(s_sh, sh);
  s_sh->add_option("--steps", sh_steps, "steps before measuring");
  s_sh->add_option("--max-shell", max_shell, "highest dyadic shell");
  s_sh->callback([&] { code = cmd_shells(sh, sh_steps, max_shell); });

  CommonOpts ck;
  std::uint64_t seed = 1;
  int ck_grid = 64, ck_sweep = 4;
  Real ck_p = 2.5;
  std::string only;
  auto* s_ck = app.add_subcommand("checks",
                                  "estimate sweeps: slopes against stated "
                                  "exponents");
  s_ck->add_option("--seed", seed, "random seed");
  s_ck->add_option("--grid", ck_grid, "grid resolution");
  s_ck->add_option("--sweep", ck_sweep, "sweep points per check");
  s_ck->add_option("--p", ck_p, "Lebesgue exponent");
  s_ck->add_option("--only", only, "run a single named check");
  s_ck->add_option("--out", ck.out_dir, "output directory");
  s_ck->callback([&] { code = cmd_checks(ck, seed, ck_grid, ck_sweep, ck_p, only); });

  std::string in_path, out_file, format = "vtk_legacy";
  auto* s_ex = app.add_subcommand("export", "convert a PF1 field dump");
  s_ex->add_option("--in", in_path, "input PF1 path")->required();
  s_ex->add_option("--file", out_file, "output path")->required();
  s_ex->add_option("--format", format, "pf1 | vtk_legacy | csv_slice");
  s_ex->callback([&] { code = cmd_export(in_path, out_file, format); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int cli_code = app.exit(e);
    return cli_code == 0 ? kOk : kConfigError;
  }
  return code;
}
