#pragma once

namespace routh {

// Universal constants of the boundary-bubble gradient expansion in dimension
// n.  All of them are fixed numbers once n is fixed:
//
//   c0  = (n(n-2))^{(n-2)/4}           bubble normalization
//   p   = (n+2)/(n-2)                  critical exponent
//   S_n = c0^{p+1} int_{R^n_+} (1+|x|^2)^{-n}            (half-space energy)
//   c2  = (1/2) c0^{p+1} int_{R^n} (1+|x|^2)^{-(n+2)/2}  (pair interaction)
//   c3  = (n-2) c0^{p+1} int_{R^n_+} x_n (|x|^2-1)(1+|x|^2)^{-(n+1)}
//   c4  = c0^{p+1} (n-2)^2/8 int_{R^n} (|x|^2-1) ln(1+|x|^2) (1+|x|^2)^{-(n+1)}
//   c5  = c0^{p+1} (n-2)/n int_{R^n} |x|^2 (1+|x|^2)^{-(n+1)}
//   cbar = (n-2)/2^{n-1}               two-point critical-radius constant
struct UniversalConstants {
    int n = 0;
    double c0 = 0.0;
    double p = 0.0;
    double S_n = 0.0;
    double c2 = 0.0;
    double c3 = 0.0;
    double c4 = 0.0;
    double c5 = 0.0;
    double cbar = 0.0;
};

// Bubble normalization (n(n-2))^{(n-2)/4} alone, for code that only needs
// the profile and not the integral constants.
double bubble_c0(int n);

// Evaluates the defining integrals by radial reduction (sphere-area factor
// for full-space integrals, hemisphere first-moment factor for the x_n-
// weighted half-space integral) and adaptive quadrature at relative
// tolerance 1e-10.  Throws validation_error for n < 5 and numerical_error if
// the quadrature fails to converge.
UniversalConstants compute_constants(int n);

// Same constants from Gamma/Beta closed forms only (the log-weighted c4
// integral reduces to a parameter derivative of a Beta integral, i.e. a
// digamma difference).  Independent of the quadrature path.
UniversalConstants closed_form_constants(int n);

// Largest relative difference across all fields of two evaluations.
double max_rel_diff(const UniversalConstants& a, const UniversalConstants& b);

} // namespace routh
