#pragma once

#include "routh/hamiltonian.hpp"
#include "routh/model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace routh {

// A located critical point of the interaction Hamiltonian together with its
// classification.  hessian_spectrum is sorted ascending; morse_index counts
// negative eigenvalues; nondegenerate means min |eigenvalue| exceeds
// 1e-8 times the spectral norm.
struct CriticalPointReport {
    Configuration cfg;
    double value = 0.0;
    double grad_norm = 0.0;
    std::vector<double> hessian_spectrum;
    int morse_index = 0;
    bool nondegenerate = false;
    std::string method; // "closed_form" | "newton"
    std::string notes;  // e.g. regularization events; empty when clean
};

// Classification shared by every construction path: re-evaluates the
// gradient norm independently and computes the spectrum of the Hessian.
CriticalPointReport classify_critical_point(const CurvatureModel& model, const Configuration& cfg,
                                            const std::string& method,
                                            double nondeg_tol = 1e-8);

// Two-point antipodal critical point in closed form: for the eig_index-th
// eigenvalue lambda of hessK1 (ascending order), with lambda > 0,
//   xbar = (cbar/lambda)^{1/n} u_lambda,   cfg = (xbar, -xbar),
// where u_lambda is a unit eigenvector and cbar = (n-2)/2^{n-1}.  The
// gradient is verified to vanish (norm <= 1e-12 * scale); the point is
// non-degenerate exactly when lambda is a simple eigenvalue.
CriticalPointReport closed_form_m2(const CurvatureModel& model, int eig_index,
                                   double nondeg_tol = 1e-8);

struct NewtonOptions {
    double tol = 1e-10;
    int max_iter = 200;
};

// Damped Newton iteration on the gradient with Levenberg-style regularization
// (the targets are saddles, so plain descent is not applicable).  Throws
// newton_error with reason max_iter_exceeded, collision_path (the step is
// forced below the separation guard), or singular_system.  Regularization
// events are recorded in the report notes.
CriticalPointReport newton_solve(const CurvatureModel& model, const Configuration& initial,
                                 const NewtonOptions& opts = {});

// Multi-start search: a ring ansatz (m points equally spaced on a circle of
// radius (cbar/lambda_max)^{1/n} in the plane of the top two eigenvectors,
// when lambda_max > 0) plus seeded Gaussian perturbations; results are
// deduplicated up to permutation of points at relative tolerance 1e-6 and
// sorted by Hamiltonian value, then lexicographically.  An empty list is a
// valid outcome.  Deterministic given the seed.
std::vector<CriticalPointReport> deflated_search(const CurvatureModel& model, int m, int n_seeds,
                                                 std::uint64_t seed,
                                                 const NewtonOptions& opts = {});

// True when two configurations coincide up to a permutation of points at the
// given relative tolerance.
bool permutation_equal(const Configuration& a, const Configuration& b, double rel_tol = 1e-6);

// Index (ascending order) of the largest simple positive eigenvalue of
// hessK1, or -1 when no positive eigenvalue is simple.
int auto_eig_index(const CurvatureModel& model);

// Full pipeline shared by the CLI and the bindings: the closed-form
// two-point construction (when m == 2 and an eigenvalue qualifies) merged
// with deflated_search, deduplicated up to permutation of points and sorted
// by value, then lexicographically.  eig_index -1 selects the largest simple
// positive eigenvalue; an explicit eig_index that fails the closed-form
// preconditions is an error.  `notes` collects skips and the local-maximum
// obstruction (hessK1 with no positive direction admits no critical point,
// and the search is not attempted).
std::vector<CriticalPointReport> find_critical_points(const CurvatureModel& model, int m,
                                                      int n_seeds, std::uint64_t seed,
                                                      int eig_index, std::string& notes);

} // namespace routh
