#pragma once

#include "routh/model.hpp"

#include <Eigen/Dense>

#include <vector>

namespace routh {

// A cluster configuration: m pairwise-distinct points in R^{n-1} (the
// tangent space at the blow-up point).  Operations reject configurations
// with a pair closer than the separation guard, where the interaction is
// singular.
using Configuration = std::vector<Eigen::VectorXd>;

inline constexpr double separation_guard = 1e-12;

// Smallest pairwise distance (infinity for a single point).
double min_separation(const Configuration& cfg);

// Shape/separation validation shared by the Hamiltonian operations.
void validate_configuration(const CurvatureModel& model, const Configuration& cfg);

// The interaction Hamiltonian
//   F(xi_1..xi_m) = (1/2) sum_i <hessK1 xi_i, xi_i>
//                   + sum_{i<j} |xi_i - xi_j|^{-(n-2)},
// quadratic confinement plus pairwise repulsion (Kirchhoff-Routh type).
double eval_F(const CurvatureModel& model, const Configuration& cfg);

// Gradient blocks: hessK1 xi_i - (n-2) sum_{j != i} (xi_i - xi_j)/|xi_i - xi_j|^n.
std::vector<Eigen::VectorXd> grad_F(const CurvatureModel& model, const Configuration& cfg);

// Gradient stacked into a single m(n-1)-vector (block i at offset i(n-1)).
Eigen::VectorXd grad_F_stacked(const CurvatureModel& model, const Configuration& cfg);

// Analytic Hessian, an m(n-1) x m(n-1) symmetric matrix: diagonal blocks
// hessK1 + sum_{j != i} Phi(xi_i - xi_j), off-diagonal blocks -Phi, with
// Phi(d) = (n-2)[ n (d d^T)/|d|^{n+2} - I/|d|^n ].
Eigen::MatrixXd hess_F(const CurvatureModel& model, const Configuration& cfg);

struct RadialForm {
    double value = 0.0;
    double d_dr = 0.0;
};

// F restricted to a ray r -> r*Lambda for a unit direction Lambda in
// (R^{n-1})^m with pairwise-distinct blocks:
//   value = (r^2/2) sum_i <hessK1 L_i, L_i> + r^{-(n-2)} sum_{i<j} |L_i - L_j|^{-(n-2)},
//   d_dr  = its exact derivative in r.
// When hessK1 is negative semidefinite, d_dr < 0 for every r > 0, so no ray
// carries an interior critical point.
RadialForm radial_form(const CurvatureModel& model, const Configuration& direction, double r);

// Stack/unstack helpers between Configuration and flat coordinates.
Eigen::VectorXd stack(const Configuration& cfg);
Configuration unstack(const Eigen::VectorXd& v, int m, int dim);

} // namespace routh
