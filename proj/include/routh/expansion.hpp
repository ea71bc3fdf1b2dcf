#pragma once

#include "routh/bubbles.hpp"
#include "routh/constants.hpp"
#include "routh/critical_points.hpp"
#include "routh/model.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace routh {

// How a half-space integral is evaluated: importance-sampled Monte Carlo
// (any number of bubbles), or deterministic radial-adaptive quadrature
// (single-bubble integrals only, where every angular factor reduces to a
// hemisphere moment).  Estimates are deterministic given the seed, across
// runs and across worker counts.
struct IntegratorSpec {
    enum class Method { importance_mc, radial_adaptive };
    Method method = Method::importance_mc;
    std::uint64_t samples = 1000000; // total points (antithetic pairs count as two)
    std::uint64_t seed = 0;
    int workers = 0;                 // <= 0: ROUTH_WORKERS env var, else hardware
    double target_rel_err = 0.0;     // 0 disables the standard-error gate
};

// The three gradient pairings, named by the parameter whose variation
// produces the test function: amplitude (h = delta_i), rate
// (h = lambda_i d delta_i / d lambda_i), center (h = lambda_i^{-1}
// d delta_i / d x_i, one component per tangential direction).
enum class PairingKind { alpha, lambda, x };
const char* pairing_kind_name(PairingKind kind);

// Local half-space model of the curvature function near the concentration
// point z:
//
//   Ktilde(x) = K_z + normal_slope * dK_dnu * x_n
//             + tangential_quad * <hessK1 (x' - z), (x' - z)>.
//
// The scalar curvature function fed to the finite-dimensional reduction is
// the half-quadratic K(x') = K_z + (1/2)<hessK1 (x'-z), (x'-z)>; the field
// integrated against carries the full quadratic (tangential_quad = 1), so
// that its true tangential gradient is twice the reduced one.  Both chart
// constants are pinned empirically; see convention_report().
struct LocalField {
    CurvatureModel model;
    Eigen::VectorXd z;            // tangential chart coordinates, R^{n-1}
    bool constant_field = false;  // true: Ktilde == K_z everywhere
    double normal_slope = -2.0;
    double tangential_quad = 1.0;

    // Field value at an ambient half-space point (size n).
    double value(const Eigen::VectorXd& x) const;
};

LocalField make_local_field(const CurvatureModel& model, const Eigen::VectorXd& z);
LocalField make_constant_field(const CurvatureModel& model, const Eigen::VectorXd& z);

// Human-readable record of the chart conventions baked into LocalField and
// the analytic pairings, and of the experiments that pin them.
std::string convention_report();

// Leading-order analytic pairings at an ensemble.  K at a center means the
// reduced half-quadratic above; its tangential gradient is hessK1 (x_i - z).
//   alpha_i S_n (1 - alpha_i^{p-1} K(x_i))                       [amplitude]
//   alpha_i^p [ c4 K(x_i) eps - (c3 / lambda_i) dK_dnu ]         [rate]
//   -sum_{j != i} alpha_j (c2/lambda_i) d eps_ij/d x_i
//     - alpha_i^p c5 hessK1 (x_i - z) / lambda_i                 [center]
double analytic_pairing_alpha(const CurvatureModel& model, const UniversalConstants& constants,
                              const BubbleEnsemble& ens, int i);
double analytic_pairing_lambda(const CurvatureModel& model, const UniversalConstants& constants,
                               const BubbleEnsemble& ens, int i);
Eigen::VectorXd analytic_pairing_x(const CurvatureModel& model, const UniversalConstants& constants,
                                   const BubbleEnsemble& ens, int i);

// Size of the leading analytic terms of a pairing (largest single-term
// magnitude, never their near-cancelling sum).  Monte Carlo standard errors
// are gated against this scale.
double analytic_leading_scale(const CurvatureModel& model, const UniversalConstants& constants,
                              const BubbleEnsemble& ens, int i, PairingKind kind);

struct NumericPairing {
    Eigen::VectorXd value;   // size 1 (alpha, lambda) or n-1 (x)
    Eigen::VectorXd stderr_; // zero for the radial-adaptive method
    std::uint64_t npoints = 0;
};

// Direct numerical evaluation of a gradient pairing at the ensemble, with
// u = sum_j alpha_j delta_j and the local field Ktilde:
//
//   <u, h> - int_{half-space} Ktilde u^{p - eps} h,
//
// where <u,h> is expanded through -Laplace(delta_j) = delta_j^p, so the
// whole pairing is the single integral of h (sum_j alpha_j delta_j^p -
// Ktilde u^{p-eps}).  If target_rel_err > 0 and the standard error exceeds
// target_rel_err times the leading analytic scale, throws mc_budget_error
// carrying the estimate.
NumericPairing numeric_pairing(const CurvatureModel& model, const BubbleEnsemble& ens, int i,
                               PairingKind kind, const IntegratorSpec& spec);

// Same, against an explicit field (e.g. the frozen constant field).
NumericPairing numeric_pairing_with_field(const LocalField& field, const BubbleEnsemble& ens,
                                          int i, PairingKind kind, const IntegratorSpec& spec);

// One pairing evaluated both ways, with the error decomposition used by the
// scaling fits.
struct PairingReport {
    PairingKind kind = PairingKind::alpha;
    int bubble = 0;
    double eps = 0.0;
    Eigen::VectorXd analytic; // components (size 1 for scalar kinds)
    Eigen::VectorXd numeric;
    Eigen::VectorXd stderr_;
    double abs_err = 0.0;       // || numeric - analytic ||
    double rel_err = 0.0;       // abs_err / max(||analytic||, leading_scale)
    double leading_scale = 0.0;
    bool stderr_ok = true;      // standard error within target_rel_err * leading_scale
    std::uint64_t npoints = 0;
};

PairingReport pairing_report(const CurvatureModel& model, const UniversalConstants& constants,
                             const BubbleEnsemble& ens, int i, PairingKind kind,
                             const IntegratorSpec& spec);

// Concentrated energy: integral of Ktilde u^{2n/(n-2)} over the half-ball of
// the given radius about z.  For radius >> 1/lambda_i it approaches
// m S_n / K_z^{(n-2)/2}.
struct EnergyEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
    std::uint64_t npoints = 0;
};
EnergyEstimate energy_near_point(const CurvatureModel& model, const BubbleEnsemble& ens,
                                 double radius, const IntegratorSpec& spec);

// The subcritical attenuation delta^{-eps}(x) of a bubble, exactly and to
// first order in eps; the gap between the two is O(eps^2 ln^2 eps) at
// concentration scaling.
double delta_eps_factor(const Bubble& b, int n, double eps, const Eigen::VectorXd& x);
double delta_eps_factor_first_order(const Bubble& b, int n, double eps, const Eigen::VectorXd& x);

// The <u,h> half of a pairing evaluated two independent ways: through the
// bubble equation (integrand (sum_j alpha_j delta_j^p) h) and through the
// Dirichlet form (integrand grad u . grad h, closed-form gradients).  The
// two agree within combined standard errors.
NumericPairing inner_product_source(const BubbleEnsemble& ens, int i, PairingKind kind,
                                    const IntegratorSpec& spec);
NumericPairing inner_product_dirichlet(const BubbleEnsemble& ens, int i, PairingKind kind,
                                       const IntegratorSpec& spec);

// Weighted log-log least squares for scaling exponents: fits value ~ C *
// eps^order, weighting each point by its relative standard error, and
// reports a 95% confidence half-width for the exponent.
struct ScalingFit {
    double order = 0.0;
    double ci95 = 0.0;
    double intercept = 0.0; // ln C
    int points = 0;
};
ScalingFit fit_scaling(const std::vector<double>& eps, const std::vector<double>& values,
                       const std::vector<double>& sigmas);

// Residual normalization under which each pairing's remainder follows a pure
// power law: amplitude residuals carry one logarithm, center residuals are
// measured in concentration units (times lambda_i, over eps^{(n-2)/n}) and
// carry two logarithms.  Returns the normalized residual; `sigma` scales the
// same way.
double corrected_residual(PairingKind kind, int n, double eps, double lambda_i, double residual);

// The remainder exponent each kind's corrected residual should exhibit:
// amplitude 1, rate 2(n-2)/n, center 2/n.
double expected_remainder_order(PairingKind kind, int n);

// Full verification sweep: assembles the zero-perturbation ensemble at each
// eps from the given critical point, evaluates all pairings analytically and
// numerically, and fits the corrected residual scaling per kind (fits are
// produced when the list has at least two distinct eps values).
struct ExpansionFit {
    PairingKind kind = PairingKind::alpha;
    double expected_order = 0.0;
    ScalingFit fit;
};
struct ExpansionVerification {
    std::vector<PairingReport> rows; // eps-major, then kind, then bubble
    std::vector<ExpansionFit> fits;
};
ExpansionVerification verify_expansion(const CurvatureModel& model,
                                       const UniversalConstants& constants,
                                       const CriticalPointReport& crit,
                                       const std::vector<double>& eps_list,
                                       const IntegratorSpec& spec);

} // namespace routh
