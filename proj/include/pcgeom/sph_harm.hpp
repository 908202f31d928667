#pragma once

#include <vector>

namespace pcgeom {

// Value and angular derivatives of a scalar field on the sphere at (theta, phi).
struct ShDerivs {
  double val = 0.0;
  double dt = 0.0;   // d/dtheta
  double dp = 0.0;   // d/dphi
  double dtt = 0.0;  // d2/dtheta2
  double dtp = 0.0;  // d2/dtheta dphi
  double dpp = 0.0;  // d2/dphi2
};

// Flat index of (l, m) with m in [-l, l]: l^2 + l + m. Total (L+1)^2 entries
// for degrees 0..L.
inline int sh_index(int l, int m) { return l * (l + 1) + m; }

/**
 * Real orthonormal spherical harmonic Y_l^m(theta, phi) with the
 * Condon-Shortley phase folded into the associated Legendre functions:
 *
 *   Y_l^0        = N_l^0 P_l^0(cos theta)
 *   Y_l^{m>0}    = sqrt(2) N_l^m P_l^m(cos theta) cos(m phi)
 *   Y_l^{-m,m>0} = sqrt(2) N_l^m P_l^m(cos theta) sin(m phi)
 *
 * with N_l^m = sqrt((2l+1)/(4 pi) (l-m)!/(l+m)!), so that the basis is
 * orthonormal under the surface measure. Y_0^0 = 1/sqrt(4 pi) and
 * Y_1^0 = sqrt(3/(4 pi)) cos(theta).
 *
 * Returns the value and all theta/phi derivatives to second order. Throws
 * std::domain_error for |m| > l and NumericalError when sin(theta) is below
 * 1e-12 (callers route pole-adjacent queries to a rotated chart well before
 * that threshold).
 */
ShDerivs eval_real_sh(int l, int m, double theta, double phi);

/**
 * Value/derivatives of the bandlimited expansion
 *   f(theta, phi) = sum_{l=0..L} sum_{m=-l..l} coeff[sh_index(l,m)] Y_l^m
 * in a single pass; coeff must hold (L+1)^2 entries in the real basis above.
 */
ShDerivs eval_real_sh_sum(int max_degree, const std::vector<double>& coeff, double theta,
                          double phi);

// Value-only expansion evaluation. Stable at any theta (no derivative
// recurrences), used by rejection sampling and quadrature projections where
// pole-adjacent evaluations are legitimate.
double eval_real_sh_value_sum(int max_degree, const std::vector<double>& coeff, double theta,
                              double phi);

// Values of every Y_l^m with l <= max_degree at one point, written to
// out[sh_index(l, m)] ((max_degree+1)^2 entries). Single table pass; stable at
// any theta.
void eval_real_sh_all_values(int max_degree, double theta, double phi, std::vector<double>& out);

}  // namespace pcgeom
