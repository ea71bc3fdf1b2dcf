#pragma once

#include "routh/model.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace routh {

// Boundary bubble on the closed half-space {x_n >= 0}: concentration rate
// lambda > 0, center on the boundary.  The center is stored by its n-1
// tangential coordinates; the ambient center is (center, 0), so the
// zero-last-coordinate constraint holds structurally.
//
//   delta_{(a,lambda)}(x) = c0 lambda^{(n-2)/2} / (1 + lambda^2 |x-a|^2)^{(n-2)/2}
//
// solves -Laplace(delta) = delta^p on the half-space with zero Neumann data
// on the boundary (the profile depends only on |x-a| with a on the boundary).
struct Bubble {
    Eigen::VectorXd center; // tangential coordinates, R^{n-1}
    double lambda = 0.0;
};

Bubble make_bubble(const Eigen::VectorXd& center, double lambda);

// m bubbles with amplitudes, the subcritical parameter eps, and the
// concentration point z (tangential coordinates of the chart origin).
struct BubbleEnsemble {
    int n = 0;
    double eps = 0.0;
    std::vector<Bubble> bubbles;
    std::vector<double> alphas;
    Eigen::VectorXd z;

    int m() const { return static_cast<int>(bubbles.size()); }
};

// Bubble profile value at an ambient point x in the closed half-space
// (x.size() == n, x[n-1] >= 0).
double eval_bubble(const Bubble& b, int n, const Eigen::VectorXd& x);

// Mutual interaction of two bubbles:
//   eps_ij = (li/lj + lj/li + li lj |xi - xj|^2)^{-(n-2)/2}.
double eps_ij(const Bubble& bi, const Bubble& bj, int n);

// Exact tangential derivative of eps_ij with respect to the first center:
//   d eps_ij / d x_i = (n-2) eps_ij^{n/(n-2)} li lj (x_j - x_i).
Eigen::VectorXd d_eps_ij_dx(const Bubble& bi, const Bubble& bj, int n);

struct IntegratorSpec; // defined in expansion.hpp

// Half-space integral of delta_j^p delta_i.  For i == j this is the squared
// energy norm S_n; for distinct bubbles it is of the order of eps_ij.
// Evaluated with the given integrator (importance-sampled Monte Carlo, or
// the radial-adaptive method when the two bubbles coincide).
double pair_inner_product(const Bubble& bi, const Bubble& bj, int n, const IntegratorSpec& spec);

// One evaluated membership inequality, reported as lhs <= rhs with its
// margin (rhs - lhs; negative when violated).  j is -1 for per-bubble
// constraints.
struct MEpsEntry {
    std::string constraint;
    int i = -1;
    int j = -1;
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;
    bool satisfied = false;
};

struct MEpsReport {
    bool ok = false;
    std::vector<MEpsEntry> entries; // every inequality, with margins
    std::vector<MEpsEntry> violations;
};

// Checks every membership inequality of the concentration neighborhood:
//   |alpha_i^{4/(n-2)} K(x_i) - 1| < eps ln^2(eps),
//   eps/C <= 1/lambda_i <= C eps,
//   |x_i - z| <= mu,
//   eps^{(n-2)/n}/C <= |x_i - x_j| <= C eps^{(n-2)/n}   (i != j),
// where K is the model's boundary quadratic at x_i.  C and mu are
// parameters; nothing is hard-coded.
MEpsReport check_M_eps(const BubbleEnsemble& ens, double C, double mu, const CurvatureModel& model);

} // namespace routh
