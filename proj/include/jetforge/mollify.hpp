#pragma once
// Time-indexed fields and space/time mollification.
//
// Time extension is reflective: u(.,-t) = u(.,t) and u(., 2T - t) = u(.,t),
// so convolution stencils near the ends reuse interior frames.
// Kernels are polynomial bumps c (1 - |x/ell|^2)^s_+ normalized to unit mass
// on the grid they act on; a width below two grid spacings degrades to a
// near-delta and is flagged with a resolution warning.

#include "jetforge/calculus.hpp"
#include "jetforge/field.hpp"

namespace jetforge {

struct MollifierSpec {
  Real ell = 0.1;   // kernel radius
  int order = 3;    // bump exponent s
};

struct TimeField {
  Real t0 = 0.0;
  Real t1 = 1.0;
  std::vector<Field> frames;
  // optional analytic/hybrid time derivative frames (same layout)
  std::vector<Field> dt_frames;

  int nt() const { return int(frames.size()); }
  Real dt() const { return (t1 - t0) / (nt() - 1); }
  Real time(int i) const { return t0 + dt() * i; }
  bool has_dt() const { return !dt_frames.empty(); }
  // reflective index into [0, nt)
  int reflect(int i) const {
    int m = nt() - 1;
    i = std::abs(i);
    i %= 2 * m;
    return i <= m ? i : 2 * m - i;
  }
};

// Warnings raised by resolution checks (non-fatal).
struct MollifyReport {
  bool space_underresolved = false;
  bool time_underresolved = false;
  int kernel_radius_cells_space = 0;
  int kernel_radius_cells_time = 0;
};

// Space mollification: circular convolution with the sampled, grid-normalized
// kernel, applied as a spectral multiplier (exact discrete convolution).
Field mollify_space(const Field& f, const MollifierSpec& spec,
                    MollifyReport* report = nullptr);

// Discrete time kernel sampled at node offsets, normalized to sum 1.
std::vector<Real> time_kernel(Real dt, const MollifierSpec& spec,
                              MollifyReport* report = nullptr);

// Time mollification of a frame sequence with reflective extension.
TimeField mollify_time(const TimeField& u, const MollifierSpec& spec,
                       MollifyReport* report = nullptr);

// Space-then-time mollification of every frame.
TimeField mollify(const TimeField& u, const MollifierSpec& spec,
                  MollifyReport* report = nullptr);

// 4th-order centered finite-difference time derivative (reflective ends).
TimeField dt_fd(const TimeField& u);
// Same stencil for a scalar time series.
std::vector<Real> dt_fd_series(const std::vector<Real>& v, Real dt);

// sup over frames of the spatial L^q norm
Real ct_lq_norm(const TimeField& u, Real q);

}  // namespace jetforge
