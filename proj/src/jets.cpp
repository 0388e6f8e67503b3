#include "jetforge/jets.hpp"

#include <cmath>

namespace jetforge {

namespace {

inline Real wrap_pi(Real x) { return std::remainder(x, kTwoPi); }

inline Real ipow(Real x, int n) {
  Real r = 1;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

}  // namespace

void validate_jet_params(const JetParams& jp) {
  require(jp.sigma > 0 && jp.sigma <= jp.r && jp.r < 1.0 && jp.mu > 1.0,
          "jet params must satisfy 0 < sigma <= r < 1 < mu");
  require(jp.q > 2.0 && jp.q < 3.0, "jet params: q must lie in (2,3)");
  require(jp.n_lambda >= 1 && jp.lambda > 0, "jet params: positive frequency");
  const Real om = jp.omega();
  require(std::abs(om - std::llround(om)) < 1e-9 && om >= 0.5,
          "jet params: N*lambda*sigma must be a positive integer");
}

Jet::Jet(const DirectionFrame& frame, const JetParams& jp,
         const Profiles& prof, const std::array<Real, 3>& alpha)
    : frame_(frame), jp_(jp), alpha_(alpha), prof_(&prof) {
  validate_jet_params(jp);
  require(std::abs(prof.p1.q - jp.q) < 1e-12,
          "jet params: q must match the profile normalization exponent");
  scaled_ = rescale_profiles(prof, jp.sigma, jp.r);
  omega_ = Real(std::llround(jp.omega()));
  zeta_ = frame.zeta.dbl();
  a_ = frame.a.dbl();
  c_ = frame.c.dbl();
}

void Jet::phases(const std::array<Real, 3>& x, Real t, Real& u, Real& v,
                 Real& w) const {
  Real du = 0, dv = 0, dw = 0;
  for (int d = 0; d < 3; ++d) {
    du += x[d] * zeta_[d];
    dv += (x[d] - alpha_[d]) * a_[d];
    dw += (x[d] - alpha_[d]) * c_[d];
  }
  u = wrap_pi(omega_ * (du + jp_.mu * t));
  v = wrap_pi(omega_ * dv);
  w = wrap_pi(omega_ * dw);
}

std::array<Real, 3> Jet::W(const std::array<Real, 3>& x, Real t) const {
  Real u, v, w;
  phases(x, t, u, v, w);
  const Real s = scaled_.p1.eval(u) * scaled_.p2.phi(v, w);
  return {s * zeta_[0], s * zeta_[1], s * zeta_[2]};
}

std::array<Real, 3> Jet::V(const std::array<Real, 3>& x, Real t,
                           int time_order) const {
  Real u, v, w;
  phases(x, t, u, v, w);
  const Real pref = 1.0 / ipow(Real(jp_.n_lambda) * jp_.lambda, 2);
  const Real s = pref * ipow(omega_ * jp_.mu, time_order) *
                 scaled_.p1.eval(u, time_order) * scaled_.p2.Phi(v, w);
  return {s * zeta_[0], s * zeta_[1], s * zeta_[2]};
}

Real Jet::G(const std::array<Real, 3>& x, Real t, int time_order) const {
  require(time_order >= 0 && time_order <= 2, "jet G: time order <= 2");
  Real u, v, w;
  phases(x, t, u, v, w);
  const Real f = scaled_.p2.phi(v, w);
  if (f == 0.0) return 0.0;
  const Real p0 = scaled_.p1.eval(u);
  if (time_order == 0) return p0 * p0 * f * f;
  const Real om = omega_ * jp_.mu;
  const Real p1 = scaled_.p1.eval(u, 1);
  if (time_order == 1) return om * 2.0 * p0 * p1 * f * f;
  const Real p2 = scaled_.p1.eval(u, 2);
  return om * om * 2.0 * (p1 * p1 + p0 * p2) * f * f;
}

std::array<Real, 3> Jet::deriv(const std::array<Real, 3>& x, Real t, int j,
                               int k) const {
  require(j >= 0 && k >= 0 && j + k <= 4, "jet derivative: order j+k <= 4");
  Real u, v, w;
  phases(x, t, u, v, w);
  const Real s = ipow(omega_ * jp_.mu, j) * scaled_.p1.eval(u, j) *
                 ipow(omega_, k) * scaled_.p2.phi(v, w, k, 0);
  return {s * zeta_[0], s * zeta_[1], s * zeta_[2]};
}

long long min_resolution(const JetParams& jp) {
  return (long long)std::ceil(8.0 * jp.omega() / std::min(jp.sigma, jp.r));
}

namespace {

void check_resolution(const Jet& jet, const Grid3& grid, bool allow) {
  // grid sampling is only meaningful when the phase gradients omega*zeta,
  // omega*a, omega*c are integer vectors; otherwise the wrapped phases jump
  // across the cell boundary and the sampled field is discontinuous there.
  const long long om = std::llround(jet.omega());
  const long long den = jet.frame().den;
  if (om % den != 0)
    throw JfError("jet sampling requires omega divisible by the frame "
                  "denominator " +
                  std::to_string(den) + ", got omega = " + std::to_string(om));
  long long need = min_resolution(jet.params());
  if (grid.n < need && !allow)
    throw JfError("jet sampling under-resolved: need n >= " +
                  std::to_string(need) + ", got " + std::to_string(grid.n));
}

// Grid phases take few distinct values: with omega*zeta etc. integer vectors,
// u(i,j,k) mod 2pi depends only on (z.(i,j,k)) mod n, so the axial factor is
// an n-entry table and the transverse factor an n^2-entry table. Sampling is
// then table lookups instead of per-point profile evaluations.
struct PhaseIndexer {
  int n = 0;
  std::array<std::vector<int>, 3> ax;  // per axis, contribution mod n

  // coef = integer phase-gradient vector
  PhaseIndexer(int n_, const std::array<long long, 3>& coef) : n(n_) {
    for (int d = 0; d < 3; ++d) {
      ax[d].resize(n);
      long long c = ((coef[d] % n) + n) % n;
      for (int i = 0; i < n; ++i) ax[d][i] = int((c * i) % n);
    }
  }
  int at(int i, int j, int k) const {
    int s = ax[0][i] + ax[1][j] + ax[2][k];
    if (s >= 2 * n) s -= 2 * n;
    else if (s >= n) s -= n;
    return s;
  }
};

bool integer_phase_gradients(const Jet& jet, std::array<long long, 3>& zi,
                             std::array<long long, 3>& ai,
                             std::array<long long, 3>& ci) {
  const Real om = jet.omega();
  for (int d = 0; d < 3; ++d) {
    const Real z = om * jet.zeta()[d], a = om * jet.axis_a()[d],
               c = om * jet.axis_c()[d];
    zi[d] = std::llround(z);
    ai[d] = std::llround(a);
    ci[d] = std::llround(c);
    if (std::abs(z - Real(zi[d])) > 1e-9 || std::abs(a - Real(ai[d])) > 1e-9 ||
        std::abs(c - Real(ci[d])) > 1e-9)
      return false;
  }
  return true;
}

// samples pref * fu(u) * fvw(v, w) [times zeta for vector output]
template <typename FU, typename FVW>
Field sample_phase_product(const Jet& jet, const Grid3& grid, Real t,
                           Real pref, const FU& fu, const FVW& fvw,
                           Rank out_rank) {
  std::array<long long, 3> zi, ai, ci;
  const bool fast = integer_phase_gradients(jet, zi, ai, ci);
  const int n = grid.n;
  Field out(grid, out_rank);
  const std::array<Real, 3> zeta = jet.zeta();
  if (!fast) {
    // fallback: direct per-point evaluation
    for (int kz = 0; kz < n; ++kz)
      for (int jy = 0; jy < n; ++jy)
        for (int ix = 0; ix < n; ++ix) {
          std::array<Real, 3> x{grid.coord(ix), grid.coord(jy),
                                grid.coord(kz)};
          Real u, v, w;
          jet.phases(x, t, u, v, w);
          const Real s = pref * fu(u) * fvw(v, w);
          const std::size_t id = grid.idx(ix, jy, kz);
          if (out_rank == Rank::scalar) {
            out.at(0, id) = s;
          } else {
            for (int d = 0; d < 3; ++d) out.at(d, id) = s * zeta[d];
          }
        }
    return out;
  }
  const Real dx = grid.dx();
  const Real om = jet.omega();
  const Real shift_u = om * jet.params().mu * t;
  Real av = 0, cw = 0;
  for (int d = 0; d < 3; ++d) {
    av += jet.alpha()[d] * jet.axis_a()[d];
    cw += jet.alpha()[d] * jet.axis_c()[d];
  }
  std::vector<Real> utab(n);
  for (int m = 0; m < n; ++m) utab[m] = fu(wrap_pi(dx * m + shift_u));
  std::vector<Real> vwtab(std::size_t(n) * n);
  for (int mw = 0; mw < n; ++mw) {
    const Real w = wrap_pi(dx * mw - om * cw);
    for (int mv = 0; mv < n; ++mv)
      vwtab[std::size_t(mw) * n + mv] =
          fvw(wrap_pi(dx * mv - om * av), w);
  }
  PhaseIndexer pu(n, zi), pv(n, ai), pw(n, ci);
  Real* o0 = out.comp(0);
  Real* o1 = out_rank == Rank::vector3 ? out.comp(1) : nullptr;
  Real* o2 = out_rank == Rank::vector3 ? out.comp(2) : nullptr;
  for (int kz = 0; kz < n; ++kz)
    for (int jy = 0; jy < n; ++jy) {
      const std::size_t row = grid.idx(0, jy, kz);
      for (int ix = 0; ix < n; ++ix) {
        const Real s = pref * utab[pu.at(ix, jy, kz)] *
                       vwtab[std::size_t(pw.at(ix, jy, kz)) * n +
                             pv.at(ix, jy, kz)];
        const std::size_t id = row + ix;
        if (out_rank == Rank::scalar) {
          o0[id] = s;
        } else {
          o0[id] = s * zeta[0];
          o1[id] = s * zeta[1];
          o2[id] = s * zeta[2];
        }
      }
    }
  return out;
}

}  // namespace

JetFields build_jet(const Jet& jet, const Grid3& grid, Real t,
                    bool allow_underresolved) {
  check_resolution(jet, grid, allow_underresolved);
  JetFields out;
  out.W = sample_phase_product(
      jet, grid, t, 1.0, [&](Real u) { return jet.psi_factor(u); },
      [&](Real v, Real w) { return jet.phi_factor(v, w); }, Rank::vector3);
  const JetParams& jp = jet.params();
  const Real vpref = 1.0 / ipow(Real(jp.n_lambda) * jp.lambda, 2);
  out.V = sample_phase_product(
      jet, grid, t, vpref, [&](Real u) { return jet.psi_factor(u); },
      [&](Real v, Real w) { return jet.Phi_factor(v, w); }, Rank::vector3);
  return out;
}

Field jet_v_field(const Jet& jet, const Grid3& grid, Real t, int time_order,
                  bool allow_underresolved) {
  check_resolution(jet, grid, allow_underresolved);
  const JetParams& jp = jet.params();
  const Real pref = 1.0 / ipow(Real(jp.n_lambda) * jp.lambda, 2) *
                    ipow(jet.omega() * jp.mu, time_order);
  return sample_phase_product(
      jet, grid, t, pref,
      [&](Real u) { return jet.psi_factor(u, time_order); },
      [&](Real v, Real w) { return jet.Phi_factor(v, w); }, Rank::vector3);
}

Field jet_g_field(const Jet& jet, const Grid3& grid, Real t, int time_order,
                  bool allow_underresolved) {
  check_resolution(jet, grid, allow_underresolved);
  require(time_order >= 0 && time_order <= 2, "jet G: time order <= 2");
  const Real om = jet.omega() * jet.params().mu;
  auto fu = [&](Real u) {
    const Real p0 = jet.psi_factor(u);
    if (time_order == 0) return p0 * p0;
    const Real p1 = jet.psi_factor(u, 1);
    if (time_order == 1) return om * 2.0 * p0 * p1;
    const Real p2 = jet.psi_factor(u, 2);
    return om * om * 2.0 * (p1 * p1 + p0 * p2);
  };
  return sample_phase_product(
      jet, grid, t, 1.0, fu,
      [&](Real v, Real w) {
        const Real f = jet.phi_factor(v, w);
        return f * f;
      },
      Rank::scalar);
}

Field jet_derivative(const Jet& jet, int j, int k, const Grid3& grid, Real t,
                     bool allow_underresolved) {
  check_resolution(jet, grid, allow_underresolved);
  require(j >= 0 && k >= 0 && j + k <= 4, "jet derivative: order j+k <= 4");
  const Real pref =
      ipow(jet.omega() * jet.params().mu, j) * ipow(jet.omega(), k);
  return sample_phase_product(
      jet, grid, t, pref, [&](Real u) { return jet.psi_factor(u, j); },
      [&](Real v, Real w) { return jet.phi_factor(v, w, k, 0); },
      Rank::vector3);
}

namespace {

constexpr int kJetQuadN = 4096;

// 1D factor: integral over one period of |(wmu)^j psi_r^(j)(u)|^p du
Real psi_factor_integral(const Jet& jet, Real p, int j) {
  const Real r = jet.params().r;
  const Real amp = std::pow(jet.omega() * jet.params().mu, j);
  return simpson(
      [&](Real u) { return std::pow(std::abs(amp * jet.psi_factor(u, j)), p); },
      -r, r, kJetQuadN);
}

// 2D factor: integral over one period cell of |omega^k d_v^k phi_sigma|^p
Real phi_factor_integral(const Jet& jet, Real p, int k) {
  const Real s = jet.params().sigma;
  const Real amp = std::pow(jet.omega(), k);
  if (k == 0) {
    // radial integrand
    return kTwoPi * simpson(
                        [&](Real rho) {
                          return std::pow(
                                     std::abs(amp * jet.phi_factor(rho, 0.0)),
                                     p) *
                                 rho;
                        },
                        0.0, s, kJetQuadN);
  }
  // tensor Simpson over the support square
  const int n = 1024;
  const Real h = 2.0 * s / n;
  auto wt = [&](int i) { return i == 0 || i == n ? 1.0 : (i % 2 ? 4.0 : 2.0); };
  Real acc = 0;
  for (int iv = 0; iv <= n; ++iv) {
    Real v = -s + iv * h;
    Real row = 0;
    for (int iw = 0; iw <= n; ++iw) {
      Real w = -s + iw * h;
      row += wt(iw) * std::pow(std::abs(amp * jet.phi_factor(v, w, k, 0)), p);
    }
    acc += wt(iv) * row;
  }
  return acc * h * h / 9.0;
}

}  // namespace

Real jet_lp_norm(const Jet& jet, Real p, int j, int k) {
  require(p >= 1.0, "jet_lp_norm: p >= 1");
  require(j + k <= 4, "jet_lp_norm: order j+k <= 4");
  // the phase map is measure preserving, so the torus integral factorizes
  Real i1 = psi_factor_integral(jet, p, j);
  Real i2 = phi_factor_integral(jet, p, k);
  return std::pow(i1 * i2, 1.0 / p);
}

std::array<Real, 9> jet_second_moment(const Jet& jet) {
  Real avg = psi_factor_integral(jet, 2.0, 0) / kTwoPi *
             phi_factor_integral(jet, 2.0, 0) / (kTwoPi * kTwoPi);
  std::array<Real, 9> m{};
  const auto& z = jet.zeta();
  for (int i = 0; i < 3; ++i)
    for (int jx = 0; jx < 3; ++jx) m[i * 3 + jx] = avg * z[i] * z[jx];
  return m;
}

ScalingReport verify_scaling(const DirectionFrame& frame, const Profiles& prof,
                             long long n_lambda, Real p, int j, int k,
                             const std::vector<ScalingPoint>& schedule,
                             Real tol) {
  require(schedule.size() >= 3, "verify_scaling: need at least 3 lambdas");
  ScalingReport rep;
  std::vector<Real> lx, ly, l2r, ltime;
  for (const ScalingPoint& s : schedule) {
    JetParams jp;
    jp.lambda = s.lambda;
    jp.sigma = s.sigma;
    jp.r = s.r;
    jp.mu = s.mu;
    jp.n_lambda = n_lambda;
    jp.q = prof.p1.q;
    Jet jet(frame, jp, prof, {0, 0, 0});
    Real nrm = jet_lp_norm(jet, p, j, k);
    rep.norms.push_back(nrm);
    lx.push_back(std::log(s.lambda));
    ly.push_back(std::log(nrm));
    l2r.push_back(std::log(s.sigma * s.sigma * s.r));
    ltime.push_back(std::log(s.lambda * s.sigma * s.mu / s.r));
  }
  rep.slope = fit_slope(lx, ly);
  // || dt^j (a.grad)^k W ||_p ~ (sigma^2 r)^(1/p - 1/q) lambda^k (lambda sigma mu / r)^j
  rep.expected = (1.0 / p - 1.0 / prof.p1.q) * fit_slope(lx, l2r) + Real(k) +
                 Real(j) * fit_slope(lx, ltime);
  rep.ok = std::abs(rep.slope - rep.expected) <= tol;
  return rep;
}

}  // namespace jetforge
