#pragma once
// Spectral calculus, pointwise products, quadrature norms.
// Derivatives are computed by wavenumber multiplication; odd-order operators
// zero the Nyquist modes so outputs stay real-symmetric.

#include "jetforge/field.hpp"

namespace jetforge {

// --- derivatives -----------------------------------------------------------
Field grad(const Field& f);              // scalar -> vector3
Field divergence(const Field& f);        // vector3 -> scalar, symtensor3 -> vector3
Field curl(const Field& f);              // vector3 -> vector3
Field laplacian(const Field& f);         // any rank
Field curl_curl(const Field& f);         // vector3 -> vector3, = grad div - lap
// partial derivative d/dx_axis of every component
Field partial(const Field& f, int axis);

// divergence of the (generally non-symmetric) outer product a (x) b,
// computed spectrally from the 9 sampled products: (div)_i = d_j (a_i b_j)
Field div_outer(const Field& a, const Field& b);

// --- products --------------------------------------------------------------
// Pointwise products. With dealias=true both inputs are 2/3-rule truncated
// before multiplication (default for user-facing quadratic terms).
Field mul_scalar(const Field& s, const Field& f, bool dealias = true);
Field outer_sym(const Field& u, bool dealias = true);    // u (x) u, symtensor3
Field dealias_23(const Field& f);
Field dot_self(const Field& u, bool dealias = true);     // |u|^2, scalar

// --- norms (trapezoidal == equal-weight quadrature on the periodic grid) ----
// pointwise magnitude: scalar |f|, vector Euclidean, symtensor Frobenius
// (off-diagonal entries counted twice).
Real lp_norm(const Field& f, Real p);
Real linf_norm(const Field& f);
Real l2_inner(const Field& a, const Field& b);
Real integral(const Field& f, int comp = 0);   // plain integral of a component
// Sobolev W^{k,q}: sum over derivative orders m<=k of ||D^m f||_q with
// |D^m f| the Frobenius magnitude over all order-m partials.
Real wkq_norm(const Field& f, int k, Real q);
Real c0_norm(const Field& f);
Real c1_norm(const Field& f);

// --- nonlocal operators ----------------------------------------------------
Field project_mean_free(const Field& f);            // P_{neq 0}
Field project_low(const Field& f, Real kappa);      // |k| <  kappa (mean kept)
Field project_high(const Field& f, Real kappa);     // |k| >= kappa
Field lp_shell(const Field& f, int j);              // 2^j <= |k| < 2^{j+1}
Field inv_laplacian(const Field& f);                // zero-mean inverse
Field inv_grad_mag(const Field& f);                 // |nabla|^{-1}, zero-mean
Field leray(const Field& u);                        // P_H = Id - grad invlap div

// Antidivergence R: vector3 -> trace-free symtensor3 with div(Ru) = u - mean u.
// Ru = 1/4 (grad P_H v + (grad P_H v)^T) + 3/4 (grad v + (grad v)^T)
//      - 1/2 (div v) Id,  where lap v = u - mean u, mean v = 0.
Field antidivergence(const Field& u);

}  // namespace jetforge
