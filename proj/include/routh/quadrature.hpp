#pragma once

#include <cstdint>
#include <functional>

namespace routh {

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    bool converged = false;
    std::int64_t evaluations = 0;
};

struct QuadratureOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-300; // effectively rel-tol driven unless the integral is ~0
    int max_depth = 60;
    std::int64_t max_evaluations = 50'000'000;
};

// Adaptive Gauss-Kronrod 7-15 on a finite interval.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureOptions& opts = {});

// Integral over [0, inf) via the compactifying substitution r = t/(1-t),
// dr = dt/(1-t)^2.  The integrand must decay fast enough that the
// transformed integrand is finite as t -> 1 (polynomial decay faster than
// r^{-2} suffices; all radial integrands here decay much faster).
QuadratureResult integrate_zero_to_inf(const std::function<double(double)>& f,
                                       const QuadratureOptions& opts = {});

} // namespace routh
