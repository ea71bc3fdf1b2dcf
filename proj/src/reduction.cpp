#include "routh/reduction.hpp"

#include "routh/errors.hpp"
#include "routh/hamiltonian.hpp"
#include "routh/special_functions.hpp"

#include <cmath>
#include <sstream>
#include <string>

namespace routh {
namespace {

void require_same_dimension(const CurvatureModel& model, const UniversalConstants& constants,
                            const char* who)
{
    if (constants.n != model.n)
        throw validation_error(std::string(who) +
                               ": model and universal constants disagree on the dimension");
}

void require_crit(const CurvatureModel& model, const CriticalPointReport& crit, const char* who)
{
    if (crit.cfg.empty())
        throw validation_error(std::string(who) + ": the critical point has no components");
    for (const Eigen::VectorXd& p : crit.cfg)
        if (p.size() != model.dim())
            throw validation_error(std::string(who) +
                                   ": critical point components must have n-1 coordinates");
}

std::string format_violations(const MEpsReport& rep, double eps, double C, double mu)
{
    std::ostringstream os;
    os << "ensemble leaves the concentration neighborhood at eps = " << eps << " (C = " << C
       << ", mu = " << mu << "):";
    for (const MEpsEntry& v : rep.violations) {
        os << " [" << v.constraint << " i=" << v.i;
        if (v.j >= 0)
            os << " j=" << v.j;
        os << " lhs=" << v.lhs << " rhs=" << v.rhs << " margin=" << v.margin << "]";
    }
    return os.str();
}

} // namespace

double concentration_scale(const CurvatureModel& model, const UniversalConstants& constants)
{
    require_same_dimension(model, constants, "concentration_scale");
    if (!(model.dK_dnu > 0.0))
        throw regime_error("concentration_scale: the construction requires dK_dnu > 0 (got " +
                           std::to_string(model.dK_dnu) + ")");
    const double c_l = constants.c4 * model.K_z / (constants.c3 * model.dK_dnu);
    if (!(c_l > 0.0) || !std::isfinite(c_l))
        throw regime_error("concentration_scale: c4 K_z / (c3 dK_dnu) must be positive and finite");
    return c_l;
}

double solve_gamma(const CurvatureModel& model, const UniversalConstants& constants)
{
    const double c_l = concentration_scale(model, constants);
    const int n = model.n;
    const double base = (constants.c2 * model.K_z / constants.c5) * pow_int(c_l, n - 2);
    if (!(base > 0.0) || !std::isfinite(base))
        throw regime_error("solve_gamma: the balancing equation has no positive root");
    const double gamma = std::pow(base, 1.0 / n);

    // Plug the root back into the displayed balancing equation.
    const double lhs = constants.c5 * gamma / model.K_z;
    const double rhs = constants.c2 / pow_int(gamma, n - 1) * pow_int(c_l, n - 2);
    const double scale = std::max(std::abs(lhs), std::abs(rhs));
    if (!(std::abs(lhs - rhs) <= 1e-12 * scale))
        throw numerical_error("solve_gamma: balancing-equation residual exceeds 1e-12");
    return gamma;
}

BubbleEnsemble assemble(const CurvatureModel& model, const CriticalPointReport& crit, double eps,
                        const ReducedVariables& perturbation, double C, double mu)
{
    require_crit(model, crit, "assemble");
    if (!(eps > 0.0) || !(eps < 1.0))
        throw validation_error("assemble: eps must lie in (0, 1)");

    const int n = model.n;
    const std::size_t m = crit.cfg.size();

    if (!perturbation.betas.empty() && perturbation.betas.size() != m)
        throw validation_error("assemble: beta offsets must be empty or one per bubble");
    if (!perturbation.Lambdas.empty() && perturbation.Lambdas.size() != m)
        throw validation_error("assemble: Lambda offsets must be empty or one per bubble");
    if (!perturbation.xis.empty() && perturbation.xis.size() != m)
        throw validation_error("assemble: xi offsets must be empty or one per bubble");
    for (const Eigen::VectorXd& xi : perturbation.xis)
        if (xi.size() != n - 1)
            throw validation_error("assemble: xi offsets must have n-1 coordinates");

    const UniversalConstants constants = closed_form_constants(n);
    const double c_l = concentration_scale(model, constants);
    const double gamma = solve_gamma(model, constants);
    const double sep_scale = std::pow(eps, static_cast<double>(n - 2) / n);

    BubbleEnsemble ens;
    ens.n = n;
    ens.eps = eps;
    ens.z = Eigen::VectorXd::Zero(n - 1);
    ens.bubbles.reserve(m);
    ens.alphas.reserve(m);

    for (std::size_t i = 0; i < m; ++i) {
        const double beta = perturbation.betas.empty() ? 0.0 : perturbation.betas[i];
        const double Lambda = perturbation.Lambdas.empty() ? 0.0 : perturbation.Lambdas[i];
        const Eigen::VectorXd xi =
            perturbation.xis.empty() ? Eigen::VectorXd::Zero(n - 1) : perturbation.xis[i];

        if (!(1.0 + Lambda > 0.0))
            throw validation_error("assemble: Lambda offsets must keep 1 + Lambda positive");

        Eigen::VectorXd center = ens.z + gamma * sep_scale * (crit.cfg[i] + xi);
        const double inv_lambda = c_l * eps * (1.0 + Lambda);
        Bubble b = make_bubble(center, 1.0 / inv_lambda);

        const double K_xi = model.K_at_offset(center - ens.z);
        const double ratio = (1.0 - beta) / K_xi;
        if (!(ratio > 0.0))
            throw validation_error(
                "assemble: beta offsets must keep (1 - beta)/K(x_i) positive (got ratio = " +
                std::to_string(ratio) + ")");
        ens.bubbles.push_back(std::move(b));
        ens.alphas.push_back(std::pow(ratio, (n - 2) / 4.0));
    }

    const MEpsReport rep = check_M_eps(ens, C, mu, model);
    if (!rep.ok)
        throw regime_error("assemble: " + format_violations(rep, eps, C, mu));
    return ens;
}

ReducedVariables read_back(const CurvatureModel& model, const UniversalConstants& constants,
                           const CriticalPointReport& crit, const BubbleEnsemble& ens)
{
    require_same_dimension(model, constants, "read_back");
    require_crit(model, crit, "read_back");
    if (ens.n != model.n)
        throw validation_error("read_back: ensemble and model disagree on the dimension");
    if (ens.bubbles.size() != crit.cfg.size())
        throw validation_error("read_back: ensemble and critical point disagree on the bubble count");
    if (ens.alphas.size() != ens.bubbles.size())
        throw validation_error("read_back: one amplitude per bubble is required");
    if (!(ens.eps > 0.0) || !(ens.eps < 1.0))
        throw validation_error("read_back: ensemble eps must lie in (0, 1)");

    const int n = model.n;
    const double c_l = concentration_scale(model, constants);
    const double gamma = solve_gamma(model, constants);
    const double sep_scale = std::pow(ens.eps, static_cast<double>(n - 2) / n);

    ReducedVariables rv;
    rv.gamma = gamma;
    const std::size_t m = ens.bubbles.size();
    rv.betas.reserve(m);
    rv.Lambdas.reserve(m);
    rv.xis.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        const Bubble& b = ens.bubbles[i];
        const double K_xi = model.K_at_offset(b.center - ens.z);
        rv.betas.push_back(1.0 - std::pow(ens.alphas[i], 4.0 / (n - 2)) * K_xi);
        rv.Lambdas.push_back(1.0 / (b.lambda * c_l * ens.eps) - 1.0);
        rv.xis.push_back((b.center - ens.z) / (gamma * sep_scale) - crit.cfg[i]);
    }
    return rv;
}

ReducedResiduals reduced_residuals(const CurvatureModel& model, const UniversalConstants& constants,
                                   const BubbleEnsemble& ens, const CriticalPointReport& crit,
                                   double C, double mu)
{
    const MEpsReport rep = check_M_eps(ens, C, mu, model);
    if (!rep.ok)
        throw regime_error("reduced_residuals: " + format_violations(rep, ens.eps, C, mu));

    const ReducedVariables rv = read_back(model, constants, crit, ens);
    const int n = model.n;
    const double p = static_cast<double>(n + 2) / (n - 2);
    const std::size_t m = ens.bubbles.size();

    // xi equation: Hessian of the interaction Hamiltonian at xi_bar, applied
    // to the stacked read-back offsets.
    const Eigen::MatrixXd H = hess_F(model, crit.cfg);
    Eigen::VectorXd xi_stacked(static_cast<Eigen::Index>(m) * (n - 1));
    for (std::size_t i = 0; i < m; ++i)
        xi_stacked.segment(static_cast<Eigen::Index>(i) * (n - 1), n - 1) = rv.xis[i];
    const Eigen::VectorXd Hxi = H * xi_stacked;

    const double sep_scale = std::pow(ens.eps, static_cast<double>(n - 2) / n);
    const double xi_prefactor = -(sep_scale / std::pow(model.K_z, (n - 2) / 4.0)) *
                                (constants.c5 * rv.gamma / model.K_z);

    ReducedResiduals out;
    out.beta_residuals.reserve(m);
    out.Lambda_residuals.reserve(m);
    out.xi_residuals.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double alpha = ens.alphas[i];
        out.beta_residuals.push_back(alpha * constants.S_n * rv.betas[i]);
        out.Lambda_residuals.push_back(-std::pow(alpha, p) * constants.c4 * model.K_z * ens.eps *
                                       rv.Lambdas[i]);
        out.xi_residuals.push_back(xi_prefactor *
                                   Hxi.segment(static_cast<Eigen::Index>(i) * (n - 1), n - 1));
    }
    return out;
}

} // namespace routh
