#pragma once

namespace routh {

// log Gamma for positive arguments (thin wrapper over std::lgamma).
double log_gamma(double x);

// Euler Beta function B(a, b) for a, b > 0.
double beta(double a, double b);

// Digamma at integer or half-integer arguments (2x must be a positive
// integer); exact harmonic-sum evaluation, no series truncation.
double digamma_half_integer(double x);

// Surface area of the unit sphere S^{d-1} in R^d: 2 pi^{d/2} / Gamma(d/2).
double unit_sphere_area(int d);

// First x_n-moment of the upper unit hemisphere of S^{n-1}:
//   integral over {w in S^{n-1}, w_n > 0} of w_n  =  sigma_{n-2} / (n-1),
// where sigma_{n-2} is the area of S^{n-2}.
double hemisphere_first_moment(int n);

// Second moment of any fixed coordinate over the upper unit hemisphere of
// S^{n-1}: half of sigma_{n-1}/n.
double hemisphere_second_moment(int n);

// x^{(n-2)/2} for x >= 0 using only multiplications and one square root;
// avoids std::pow in Monte Carlo hot loops.
double pow_half_nm2(double x, int n);

// x^k for integer k >= 0 by repeated multiplication.
double pow_int(double x, int k);

} // namespace routh
