#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace routh {

// Input/validation failures: malformed models, bad dimensions, out-of-range
// parameters.  CLI maps these to exit code 2.
class validation_error : public std::invalid_argument {
public:
    explicit validation_error(const std::string& msg) : std::invalid_argument(msg) {}
};

// The assembled regime does not satisfy the sign hypotheses needed for a
// positive concentration scale (c4*K/(c3*dK_dnu) must be positive and the
// outward normal derivative must be positive).  CLI maps these to exit code 3.
class regime_error : public std::runtime_error {
public:
    explicit regime_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failures: quadrature non-convergence, solver breakdown, Monte
// Carlo budget misses.  CLI maps these to exit code 4.
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Newton solver failure with a typed reason.
class newton_error : public numerical_error {
public:
    enum class Reason { max_iter_exceeded, collision_path, singular_system };

    newton_error(Reason r, const std::string& msg) : numerical_error(msg), reason(r) {}

    Reason reason;
};

// Monte Carlo standard-error target missed at the sample budget.  Carries the
// estimate so callers can still report the value alongside the failure.
class mc_budget_error : public numerical_error {
public:
    mc_budget_error(const std::string& msg, double achieved, double required)
        : numerical_error(msg), achieved_stderr(achieved), required_stderr(required) {}

    double achieved_stderr;
    double required_stderr;
    std::vector<double> estimate; // componentwise values, when available
};

} // namespace routh
