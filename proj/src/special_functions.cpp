#include "routh/special_functions.hpp"

#include "routh/errors.hpp"

#include <cmath>
#include <numbers>

namespace routh {

double log_gamma(double x)
{
    if (!(x > 0.0)) throw validation_error("log_gamma requires a positive argument");
    return std::lgamma(x);
}

double beta(double a, double b)
{
    return std::exp(log_gamma(a) + log_gamma(b) - log_gamma(a + b));
}

double digamma_half_integer(double x)
{
    constexpr double euler_gamma = 0.57721566490153286060651209008240243;
    const double two_x = 2.0 * x;
    const long k = std::lround(two_x);
    if (k <= 0 || std::abs(two_x - static_cast<double>(k)) > 1e-9)
        throw validation_error("digamma_half_integer requires a positive integer or half-integer");

    if (k % 2 == 0) {
        // psi(m) = -gamma + sum_{j=1}^{m-1} 1/j
        const long m = k / 2;
        double s = -euler_gamma;
        for (long j = 1; j < m; ++j) s += 1.0 / static_cast<double>(j);
        return s;
    }
    // psi(m + 1/2) = -gamma - 2 ln 2 + 2 sum_{j=1}^{m} 1/(2j - 1)
    const long m = (k - 1) / 2;
    double s = -euler_gamma - 2.0 * std::numbers::ln2;
    for (long j = 1; j <= m; ++j) s += 2.0 / static_cast<double>(2 * j - 1);
    return s;
}

double unit_sphere_area(int d)
{
    if (d < 1) throw validation_error("unit_sphere_area requires d >= 1");
    const double hd = 0.5 * static_cast<double>(d);
    return 2.0 * std::exp(hd * std::log(std::numbers::pi) - log_gamma(hd));
}

double hemisphere_first_moment(int n)
{
    if (n < 2) throw validation_error("hemisphere_first_moment requires n >= 2");
    return unit_sphere_area(n - 1) / static_cast<double>(n - 1);
}

double hemisphere_second_moment(int n)
{
    if (n < 2) throw validation_error("hemisphere_second_moment requires n >= 2");
    return 0.5 * unit_sphere_area(n) / static_cast<double>(n);
}

double pow_half_nm2(double x, int n)
{
    // x^{(n-2)/2}: integer part by squaring-free repeated multiply (the
    // exponents here are tiny), sqrt factor when n is odd.
    const int k = (n - 2) / 2;
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= x;
    if ((n - 2) % 2 != 0) r *= std::sqrt(x);
    return r;
}

double pow_int(double x, int k)
{
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= x;
    return r;
}

} // namespace routh
