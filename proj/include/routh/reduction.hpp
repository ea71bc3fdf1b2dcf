#pragma once

#include "routh/bubbles.hpp"
#include "routh/constants.hpp"
#include "routh/critical_points.hpp"
#include "routh/model.hpp"

#include <Eigen/Dense>

#include <vector>

namespace routh {

// Reduced coordinates of an ensemble relative to a critical point xi_bar of
// the interaction Hamiltonian:
//
//   beta_i   = 1 - alpha_i^{4/(n-2)} K(x_i)
//   1/lambda_i = c_l * eps * (1 + Lambda_i),  c_l = c4 K_z / (c3 dK_dnu)
//   x_i      = z + gamma eps^{(n-2)/n} (xi_bar_i + xi_i)
//
// The same struct doubles as a perturbation: empty lists mean zero offsets.
struct ReducedVariables {
    std::vector<double> betas;
    std::vector<double> Lambdas;
    std::vector<Eigen::VectorXd> xis;
    double gamma = 0.0;
};

// The concentration scale c_l = c4 K_z / (c3 dK_dnu).  Requires dK_dnu > 0
// and a positive ratio (regime error otherwise: the construction needs the
// normal derivative pointing the right way).
double concentration_scale(const CurvatureModel& model, const UniversalConstants& constants);

// The unique positive root of the balancing equation
//   c5 gamma / K_z = (c2 / gamma^{n-1}) c_l^{n-2},
// i.e. gamma = [ (c2 K_z / c5) c_l^{n-2} ]^{1/n}.  The returned value is
// verified to satisfy the displayed equation to 1e-12 relative.
double solve_gamma(const CurvatureModel& model, const UniversalConstants& constants);

// Builds the blow-up ensemble at subcritical parameter eps from a critical
// point, applying the optional reduced-variable offsets (zero by default):
// amplitudes from beta, rates from Lambda, centers from xi, with z = 0 in
// chart coordinates.  The result must lie in the concentration neighborhood
// for the given C and mu; a violation raises a regime error listing every
// failed inequality with its margin.  Universal constants are evaluated on
// the closed-form path internally.
BubbleEnsemble assemble(const CurvatureModel& model, const CriticalPointReport& crit, double eps,
                        const ReducedVariables& perturbation = ReducedVariables{},
                        double C = 10.0, double mu = 0.5);

// Inverts the change of variables: recovers (beta, Lambda, xi, gamma) of an
// ensemble relative to the given critical point.  assemble followed by
// read_back reproduces the input offsets to machine precision.
ReducedVariables read_back(const CurvatureModel& model, const UniversalConstants& constants,
                           const CriticalPointReport& crit, const BubbleEnsemble& ens);

// Leading-order left-hand sides of the reduced system at the ensemble:
//
//   beta equation:    alpha_i S_n beta_i
//   Lambda equation:  -alpha_i^p c4 K_z eps Lambda_i
//   xi equation:      -(eps^{(n-2)/n} / K_z^{(n-2)/4}) (c5 gamma / K_z)
//                       * [Hess F(xi_bar) . xi]_i
//
// All three vanish exactly at zero perturbation.  The xi equation is stated
// in the full center-derivative pairing normalization (the center pairing of
// the expansion module carries an extra 1/lambda_i).  The ensemble must lie
// in the concentration neighborhood for the given C and mu.
struct ReducedResiduals {
    std::vector<double> beta_residuals;
    std::vector<double> Lambda_residuals;
    std::vector<Eigen::VectorXd> xi_residuals;
};
ReducedResiduals reduced_residuals(const CurvatureModel& model, const UniversalConstants& constants,
                                   const BubbleEnsemble& ens, const CriticalPointReport& crit,
                                   double C = 10.0, double mu = 0.5);

} // namespace routh
