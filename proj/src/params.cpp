#include "jetforge/params.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace jetforge {

namespace {

constexpr Real kLog10Max = 308.0;  // largest double ~ 1.8e308

Real lin_or_inf(Real log10v) {
  if (log10v > kLog10Max) return std::numeric_limits<Real>::infinity();
  return std::pow(10.0, log10v);
}

// b^m as a long double with overflow reported as +inf (m is small; the
// overflow risk is in a^(b^m), handled in log domain by the caller)
Real tower(Real b, long long m) {
  Real p = 1;
  for (long long i = 0; i < m; ++i) {
    p *= b;
    if (!std::isfinite(p)) return std::numeric_limits<Real>::infinity();
  }
  return p;
}

}  // namespace

// ---------------------------------------------------------------------------
// text form

std::string ledger_to_text(const ParamLedger& led) {
  std::ostringstream os;
  os.precision(17);
  os << "a = " << led.a << "\n"
     << "b = " << led.b << "\n"
     << "beta = " << led.beta << "\n"
     << "q = " << led.q << "\n"
     << "A = " << led.A << "\n"
     << "eps = " << led.eps << "\n"
     << "nu = " << led.nu << "\n"
     << "p_aux = " << led.p_aux << "\n"
     << "T = " << led.T << "\n"
     << "e_max = " << led.e_max << "\n";
  return os.str();
}

namespace {

Real parse_number(const std::string& s) {
  auto slash = s.find('/');
  if (slash != std::string::npos) {
    Real num = std::stod(s.substr(0, slash));
    Real den = std::stod(s.substr(slash + 1));
    require(den != 0.0, "ledger: rational literal with zero denominator");
    return num / den;
  }
  return std::stod(s);
}

}  // namespace

ParamLedger ledger_from_text(const std::string& text) {
  ParamLedger led;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t\r");
      auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty()) continue;
    Real x = parse_number(val);
    if (key == "a") led.a = x;
    else if (key == "b") led.b = x;
    else if (key == "beta") led.beta = x;
    else if (key == "q") led.q = x;
    else if (key == "A") led.A = x;
    else if (key == "eps") led.eps = x;
    else if (key == "nu") led.nu = x;
    else if (key == "p_aux") led.p_aux = x;
    else if (key == "T") led.T = x;
    else if (key == "e_max") led.e_max = x;
    else throw JfError("ledger: unknown key '" + key + "'");
  }
  return led;
}

// ---------------------------------------------------------------------------
// exact integrality

bool approx_rational(Real x, long long maxden, Real tol, Rat& out) {
  // continued fraction convergents
  long long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  Real v = x;
  for (int it = 0; it < 64; ++it) {
    if (std::abs(v) > 9e18) break;
    long long ai = (long long)std::floor(v);
    long long p2 = ai * p1 + p0, q2 = ai * q1 + q0;
    if (q2 > maxden || q2 < 0) break;
    p0 = p1; q0 = q1; p1 = p2; q1 = q2;
    Real approx = Real(p1) / Real(q1);
    if (std::abs(approx - x) <= tol * std::max<Real>(1.0, std::abs(x))) {
      out = Rat(p1, q1);
      return true;
    }
    Real frac = v - Real(ai);
    if (frac <= 0) break;
    v = 1.0 / frac;
  }
  return false;
}

bool integer_rational_power(long long base, long long num, long long den) {
  require(base >= 1 && den >= 1, "integer_rational_power: positive base/den");
  if (num < 0) return base == 1;
  if (num == 0 || base == 1) return true;
  long long g = std::gcd(num, den);
  num /= g; den /= g;
  // factorize base by trial division; base^(num/den) is an integer iff every
  // prime exponent times num is divisible by den
  long long n = base;
  for (long long p = 2; p * p <= n; ++p) {
    if (n % p) continue;
    long long e = 0;
    while (n % p == 0) { n /= p; ++e; }
    if ((e * num) % den != 0) return false;
  }
  if (n > 1 && num % den != 0) return false;
  return true;
}

IntegralityWitness az90_witness(const ParamLedger& led) {
  IntegralityWitness w;
  const Real x = (3.0 - led.q - (led.q + 2.0) * led.eps_star()) / 3.0;
  w.value = std::pow(led.a, x);
  w.deviation = std::abs(w.value - std::llround(w.value));
  w.b_integral = std::abs(led.b - std::llround(led.b)) < 1e-9;

  Rat rq, rA;
  const bool a_int = led.a > 0.5 && led.a < 9e18 &&
                     std::abs(led.a - std::llround(led.a)) < 1e-12;
  if (a_int && approx_rational(led.q, 1000000, 1e-12, rq) &&
      approx_rational(led.A, 1000000, 1e-12, rA) && rA != Rat(0)) {
    // x = (3 - q - (q+2)(3-q)/A) / 3 exactly
    Rat rx = (Rat(3) - rq - (rq + Rat(2)) * (Rat(3) - rq) / rA) / Rat(3);
    if (rx > Rat(0)) {
      w.exact_path = true;
      w.integral = integer_rational_power(std::llround(led.a),
                                          rx.numerator(), rx.denominator());
      return w;
    }
  }
  w.integral = w.deviation < 1e-6 * std::max<Real>(1.0, w.value);
  return w;
}

// ---------------------------------------------------------------------------
// schedule

std::vector<LevelScalars> derive_schedule(const ParamLedger& led,
                                          long long m_max) {
  require(led.a > 1 && led.b > 1, "derive_schedule: a, b > 1");
  require(led.q > 2 && led.q < 3, "derive_schedule: q in (2,3)");
  require(led.e_max > 0, "derive_schedule: e_max > 0");
  const Real es = led.eps_star();
  const Real l10a = std::log10(led.a);
  const Real log10_l1 = led.b * l10a;  // level-1 frequency
  const Real delta_l1_coef = 2 * led.beta + (led.q - 2) * (1 + es);
  const IntegralityWitness wit = az90_witness(led);

  std::vector<LevelScalars> table;
  for (long long m = 0; m <= m_max; ++m) {
    LevelScalars row;
    row.m = m;
    const Real log10_lm = tower(led.b, m) * l10a;
    const Real log10_lm1 = tower(led.b, m + 1) * l10a;
    row.log10_lambda = log10_lm;
    row.lambda = lin_or_inf(log10_lm);
    row.log10_delta = -2 * led.beta * log10_lm + delta_l1_coef * log10_l1 +
                      std::log10(led.e_max);
    row.delta = lin_or_inf(row.log10_delta);
    row.log10_sigma = -log10_lm1 * (led.q + (led.q + 2) * es) / 3.0;
    row.sigma = std::pow(10.0, row.log10_sigma);
    row.log10_r = -log10_lm1 * (led.q - (4 - led.q) * es) / 3.0;
    row.r = std::pow(10.0, row.log10_r);
    row.log10_mu = log10_lm1 * (1 + 2 * es);
    row.mu = lin_or_inf(row.log10_mu);
    // ell = (sigma^2 r)^((q-2)/q) delta_{m+1}^(1/2) / (lambda_m^5 delta_m^(1/2))
    const Real log10_dm1 = -2 * led.beta * log10_lm1 +
                           delta_l1_coef * log10_l1 + std::log10(led.e_max);
    row.log10_ell = (led.q - 2) / led.q * (2 * row.log10_sigma + row.log10_r) +
                    0.5 * log10_dm1 - 5 * log10_lm - 0.5 * row.log10_delta;
    row.ell = std::pow(10.0, row.log10_ell);
    // 2^{i_max} ~ lambda_{m+1}^{2[(q-2)(1+e*) + (5+beta(b-1))/b]}
    const Real gain = (led.q - 2) * (1 + es) +
                      (5 + led.beta * (led.b - 1)) / led.b;
    row.i_max_estimate = 2.0 * gain * log10_lm1 / std::log10(2.0);
    // lambda_{m+1} sigma = a^{b^{m+1}(3-q-(q+2)e*)/3}: integral for every
    // level exactly when the base witness holds (b integral)
    row.lambda_sigma_integral = wit.integral && wit.b_integral;
    table.push_back(row);
  }
  return table;
}

// ---------------------------------------------------------------------------
// feasibility

const ConstraintRecord* FeasibilityReport::find(const std::string& name) const {
  for (const auto& it : items)
    if (it.name == name) return &it;
  return nullptr;
}

std::string FeasibilityReport::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "name,satisfied,margin\r\n";
  for (const auto& it : items)
    os << it.name << "," << (it.satisfied ? 1 : 0) << "," << it.margin
       << "\r\n";
  return os.str();
}

namespace {

void add(FeasibilityReport& rep, const std::string& name, Real margin) {
  rep.items.push_back({name, margin >= 0, margin});
}

}  // namespace

FeasibilityReport check_feasibility(const ParamLedger& led) {
  FeasibilityReport rep;
  const Real es = led.eps_star();

  // base ranges
  add(rep, "range-a", led.a - 1);
  add(rep, "range-b", led.b - 1);
  add(rep, "range-beta", std::min(led.beta, 1 - led.beta));
  add(rep, "range-q", std::min(led.q - 2, 3 - led.q));
  add(rep, "range-A", led.A - (led.q + 2));
  add(rep, "range-eps", std::min(led.eps, es / 2 - led.eps));
  add(rep, "range-nu", led.nu);
  add(rep, "range-p-aux", std::min(led.p_aux - 1, 2 - led.p_aux));
  add(rep, "range-eps-star", 0.25 - es);

  // smoothness integrality
  IntegralityWitness wit = az90_witness(led);
  add(rep, "integrality-a", wit.integral ? 0.0 : -wit.deviation);
  add(rep, "integrality-b",
      wit.b_integral ? 0.0 : -std::abs(led.b - std::llround(led.b)));

  // mollification-loss window: q below the tau balance root, b above the
  // implicit lower bound (b appears on both sides; evaluated as a signed
  // fixed-point residual)
  const Real gain_b = (5 + led.beta * (led.b - 1)) / led.b;
  const Real tau1 = 121 * (1 + es) + 60 * gain_b;
  const Real tau2 = 1 - 120 * gain_b;
  const Real rad1 = tau1 * tau1 + 240 * (1 + es) * tau2;
  if (rad1 >= 0)
    add(rep, "window-moll-q",
        2 + (-tau1 + std::sqrt(rad1)) / (120 * (1 + es)) - led.q);
  else
    add(rep, "window-moll-q", rad1);  // no admissible q at all
  const Real denom_az = 3 - led.q - (led.q + 2) * es;
  if (denom_az > 0)
    add(rep, "window-moll-b", led.b - 60 * led.q * (5 + led.beta * (led.b - 1)) / denom_az);
  else
    add(rep, "window-moll-b", denom_az);

  // cutoff-sum window
  const Real tau3 = 10 - led.eps + 2 * led.beta * (led.b - 1);
  const Real rad2 = tau3 * tau3 + 16 * led.b * led.eps * (1 + es);
  add(rep, "window-cutoff-q",
      2 + (-tau3 + std::sqrt(rad2)) / (4 * led.b * (1 + es)) - led.q);

  // corrector window
  add(rep, "window-corrector-q", 2 + led.eps / (34 * (1 + es)) - led.q);
  add(rep, "window-corrector-b",
      led.b - 34 * (5 + led.beta * (led.b - 1)) / led.eps);

  // energy-gap window (four-part system)
  const Real slack = es - 2 * led.eps;
  add(rep, "window-energy-q", 2 + slack / (144 * (1 + es)) - led.q);
  add(rep, "window-energy-b", slack > 0 ? led.b - 720 / slack : slack);
  add(rep, "window-energy-beta", slack / (4 * (36 + 2 * led.b)) - led.beta);
  add(rep, "window-energy-p",
      1 + slack / (led.q * (1 + led.eps)) - led.p_aux);

  // amplitude-decay windows on b beta
  add(rep, "window-bbeta-low", led.b * led.beta);
  add(rep, "window-bbeta-high", 0.5 - led.b * led.beta);
  add(rep, "window-bbeta-eps", led.eps - 2 * led.b * led.b * led.beta);
  add(rep, "window-bbeta-quarter", 0.25 - led.b * led.b * led.beta);

  // mollification-scale window: both endpoint ratios are powers of the level
  // frequency; the exponents must be strictly positive
  add(rep, "window-ell-low", 1 - led.beta * (led.b - 1));
  add(rep, "window-ell-high", led.beta * (led.b - 1));

  rep.ok = true;
  for (const auto& it : rep.items) rep.ok = rep.ok && it.satisfied;
  return rep;
}

// ---------------------------------------------------------------------------
// search

SearchResult search_admissible(const SearchBox& box, long long resolution) {
  require(resolution >= 1, "search_admissible: resolution >= 1");
  SearchResult res;
  const long long nq = resolution, ne = resolution, nb = resolution,
                  nbeta = resolution;
  for (long long iq = 0; iq < nq; ++iq) {
    const Real q = nq == 1 ? box.q_lo
                           : box.q_lo + (box.q_hi - box.q_lo) * iq / (nq - 1);
    for (long long ie = 0; ie < ne; ++ie) {
      const Real eps =
          ne == 1 ? box.eps_lo
                  : box.eps_lo + (box.eps_hi - box.eps_lo) * ie / (ne - 1);
      for (long long ib = 0; ib < nb; ++ib) {
        const long long b =
            nb == 1 ? box.b_lo
                    : box.b_lo + (box.b_hi - box.b_lo) * ib / (nb - 1);
        for (long long ig = 0; ig < nbeta; ++ig) {
          const Real l10beta =
              nbeta == 1 ? box.log10_beta_lo
                         : box.log10_beta_lo +
                               (box.log10_beta_hi - box.log10_beta_lo) * ig /
                                   (nbeta - 1);
          ParamLedger led;
          led.q = q;
          led.A = box.A;
          led.eps = eps;
          led.b = Real(b);
          led.beta = std::pow(10.0, l10beta);
          led.nu = box.nu;
          led.p_aux = box.p_aux;
          led.T = box.T;
          led.e_max = box.e_max;
          // pick a so the smoothness integrality holds exactly:
          // a = N^{3/(3-q-(q+2)e*)}
          const Real x = (3 - q - (q + 2) * led.eps_star()) / 3;
          if (x <= 0) continue;
          led.a = std::pow(Real(box.base_integer), 1.0 / x);
          ++res.points_scanned;
          FeasibilityReport rep = check_feasibility(led);
          if (rep.ok) {
            res.admissible.push_back(led);
          } else {
            const ConstraintRecord* worst = nullptr;
            for (const auto& it : rep.items)
              if (!it.satisfied && (!worst || it.margin < worst->margin))
                worst = &it;
            ++res.binding[worst->name];
          }
        }
      }
    }
  }
  std::sort(res.admissible.begin(), res.admissible.end(),
            [](const ParamLedger& l, const ParamLedger& r) {
              return l.q > r.q;
            });
  return res;
}

// ---------------------------------------------------------------------------
// presets

PresetName preset_from_string(const std::string& s) {
  if (s == "identity_scale") return PresetName::identity_scale;
  if (s == "tiny") return PresetName::tiny;
  if (s == "micro") return PresetName::micro;
  throw JfError("unknown preset '" + s + "'");
}

DeskPreset desk_preset(PresetName name) {
  DeskPreset p;
  // shared ledger scaffold: the desk presets do not live on the admissible
  // asymptotic schedule, but the checker still reports every margin
  p.ledger.a = 4;
  p.ledger.b = 2;
  p.ledger.beta = 0.05;
  p.ledger.q = 2.5;
  p.ledger.A = 5;         // eps_star = 0.1
  p.ledger.eps = 0.04;
  p.ledger.nu = 1e-3;
  p.ledger.p_aux = 1.5;
  p.ledger.T = kTwoPi;
  p.ledger.e_max = 2.0;

  JetParams j;
  j.n_lambda = 1;
  j.q = p.ledger.q;
  switch (name) {
    case PresetName::identity_scale:
      p.name = "identity_scale";
      j.lambda = 4;  j.sigma = 0.25;  j.r = 0.25;  j.mu = 4;
      p.grid_n = 64;  p.n_t = 9;
      break;
    case PresetName::tiny:
      p.name = "tiny";
      j.lambda = 16;  j.sigma = 0.125;  j.r = 0.25;  j.mu = 16;
      p.grid_n = 128;  p.n_t = 33;
      break;
    case PresetName::micro:
      p.name = "micro";
      j.lambda = 8;  j.sigma = 0.25;  j.r = 0.5;  j.mu = 8;
      p.grid_n = 64;  p.n_t = 9;
      break;
  }
  p.jets = j;
  p.jets_iteration = j;
  p.jets_iteration.n_lambda = 5;  // family-frame integrality (denominator 5)
  p.family = 0;

  validate_jet_params(p.jets);
  validate_jet_params(p.jets_iteration);

  p.report = check_feasibility(p.ledger);
  for (const auto& it : p.report.items)
    if (!it.satisfied) p.violated.push_back(it.name);
  p.violated.push_back("schedule-detached: sigma, r, mu chosen directly, not "
                       "from the level schedule");
  if (min_resolution(p.jets_iteration) > p.grid_n)
    p.violated.push_back("sampling-underresolved: family-frame jets need n >= " +
                         std::to_string(min_resolution(p.jets_iteration)));
  return p;
}

}  // namespace jetforge
