#include "routh/constants.hpp"

#include "routh/errors.hpp"
#include "routh/quadrature.hpp"
#include "routh/special_functions.hpp"

#include <cmath>
#include <string>

namespace routh {
namespace {

void require_dimension(int n)
{
    if (n < 5)
        throw validation_error("dimension must satisfy n >= 5 (got n = " + std::to_string(n) + ")");
}

double quad_or_throw(const std::function<double(double)>& f, const char* name,
                     double rel_tol = 1e-10)
{
    QuadratureOptions opts;
    opts.rel_tol = rel_tol;
    QuadratureResult r = integrate_zero_to_inf(f, opts);
    if (!r.converged)
        throw numerical_error(std::string("quadrature failed to converge for ") + name);
    return r.value;
}

double c0_of(int n)
{
    return std::pow(static_cast<double>(n) * (n - 2), (n - 2) / 4.0);
}

} // namespace

double bubble_c0(int n)
{
    require_dimension(n);
    return c0_of(n);
}

UniversalConstants compute_constants(int n)
{
    require_dimension(n);

    UniversalConstants k;
    k.n = n;
    k.c0 = c0_of(n);
    k.p = static_cast<double>(n + 2) / (n - 2);
    k.cbar = (n - 2) / std::pow(2.0, n - 1);

    const double c0p1 = std::pow(k.c0, 2.0 * n / (n - 2)); // c0^{p+1}
    const double sphere = unit_sphere_area(n);
    const double hemi_xn = hemisphere_first_moment(n);
    const double nd = static_cast<double>(n);

    // S_n: half-space integral of (1+|x|^2)^{-n}.
    k.S_n = c0p1 * 0.5 * sphere *
            quad_or_throw([nd](double r) { return std::pow(r, nd - 1.0) * std::pow(1.0 + r * r, -nd); },
                          "S_n");

    // c2: (1/2) full-space integral of (1+|x|^2)^{-(n+2)/2}.
    k.c2 = 0.5 * c0p1 * sphere *
           quad_or_throw(
               [nd](double r) { return std::pow(r, nd - 1.0) * std::pow(1.0 + r * r, -(nd + 2.0) / 2.0); },
               "c2");

    // c3: half-space integral with the x_n weight; x_n = r w_n contributes one
    // extra power of r and the hemisphere first-moment factor.
    k.c3 = (n - 2) * c0p1 * hemi_xn *
           quad_or_throw(
               [nd](double r) {
                   const double r2 = r * r;
                   return std::pow(r, nd) * (r2 - 1.0) * std::pow(1.0 + r2, -(nd + 1.0));
               },
               "c3");

    // c4: full-space, logarithmic weight.
    k.c4 = c0p1 * (n - 2) * (n - 2) / 8.0 * sphere *
           quad_or_throw(
               [nd](double r) {
                   const double r2 = r * r;
                   return std::pow(r, nd - 1.0) * (r2 - 1.0) * std::log1p(r2) *
                          std::pow(1.0 + r2, -(nd + 1.0));
               },
               "c4", 1e-12);

    // c5: full-space, |x|^2 weight.
    k.c5 = c0p1 * (n - 2) / nd * sphere *
           quad_or_throw(
               [nd](double r) { return std::pow(r, nd + 1.0) * std::pow(1.0 + r * r, -(nd + 1.0)); },
               "c5");

    return k;
}

UniversalConstants closed_form_constants(int n)
{
    require_dimension(n);

    UniversalConstants k;
    k.n = n;
    k.c0 = c0_of(n);
    k.p = static_cast<double>(n + 2) / (n - 2);
    k.cbar = (n - 2) / std::pow(2.0, n - 1);

    const double c0p1 = std::pow(k.c0, 2.0 * n / (n - 2));
    const double sphere = unit_sphere_area(n);
    const double hemi_xn = hemisphere_first_moment(n);
    const double hn = 0.5 * n;

    // All radial pieces are instances of
    //   int_0^inf r^{a-1} (1+r^2)^{-c} dr = (1/2) B(a/2, c - a/2).
    k.S_n = c0p1 * 0.5 * sphere * 0.5 * beta(hn, hn);
    k.c2 = 0.5 * c0p1 * sphere * 0.5 * beta(hn, 1.0);

    // c3 radial piece: (1/2)[B((n+3)/2,(n-1)/2) - B((n+1)/2,(n+1)/2)], which
    // collapses to (1/2) Gamma((n+1)/2) Gamma((n-1)/2) / Gamma(n+1).
    k.c3 = (n - 2) * c0p1 * hemi_xn * 0.5 *
           std::exp(log_gamma(0.5 * (n + 1)) + log_gamma(0.5 * (n - 1)) - log_gamma(n + 1.0));

    // c4 radial piece: d/dc of the Beta closed form gives digamma factors,
    //   int r^{a-1}(1+r^2)^{-c} ln(1+r^2) dr = (1/2)B(a/2,c-a/2)[psi(c)-psi(c-a/2)],
    // applied at (a,c) = (n+2, n+1) and (n, n+1).
    {
        const double b1 = 0.5 * beta(hn + 1.0, hn) *
                          (digamma_half_integer(n + 1.0) - digamma_half_integer(hn));
        const double b2 = 0.5 * beta(hn, hn + 1.0) *
                          (digamma_half_integer(n + 1.0) - digamma_half_integer(hn + 1.0));
        k.c4 = c0p1 * (n - 2) * (n - 2) / 8.0 * sphere * (b1 - b2);
    }

    k.c5 = c0p1 * (n - 2) / static_cast<double>(n) * sphere * 0.5 * beta(hn + 1.0, hn);

    return k;
}

double max_rel_diff(const UniversalConstants& a, const UniversalConstants& b)
{
    auto rel = [](double x, double y) {
        const double scale = std::max({std::abs(x), std::abs(y), 1e-300});
        return std::abs(x - y) / scale;
    };
    double m = 0.0;
    m = std::max(m, rel(a.c0, b.c0));
    m = std::max(m, rel(a.p, b.p));
    m = std::max(m, rel(a.S_n, b.S_n));
    m = std::max(m, rel(a.c2, b.c2));
    m = std::max(m, rel(a.c3, b.c3));
    m = std::max(m, rel(a.c4, b.c4));
    m = std::max(m, rel(a.c5, b.c5));
    m = std::max(m, rel(a.cbar, b.cbar));
    return m;
}

} // namespace routh
