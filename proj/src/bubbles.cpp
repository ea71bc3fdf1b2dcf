#include "routh/bubbles.hpp"

#include "routh/constants.hpp"
#include "routh/errors.hpp"
#include "routh/expansion.hpp"
#include "routh/mc.hpp"
#include "routh/quadrature.hpp"
#include "routh/special_functions.hpp"

#include <cmath>
#include <string>

namespace routh {
namespace {

void require_bubble(const Bubble& b, int n, const char* who)
{
    if (b.center.size() != n - 1)
        throw validation_error(std::string(who) + ": bubble center must have n-1 = " +
                               std::to_string(n - 1) + " tangential coordinates, got " +
                               std::to_string(b.center.size()));
    if (!(b.lambda > 0.0) || !std::isfinite(b.lambda))
        throw validation_error(std::string(who) + ": bubble rate must be positive and finite");
    for (Eigen::Index k = 0; k < b.center.size(); ++k)
        if (!std::isfinite(b.center[k]))
            throw validation_error(std::string(who) + ": bubble center has a non-finite entry");
}

// li/lj + lj/li + li lj |xi - xj|^2
double interaction_base(const Bubble& bi, const Bubble& bj)
{
    const double li = bi.lambda;
    const double lj = bj.lambda;
    return li / lj + lj / li + li * lj * (bi.center - bj.center).squaredNorm();
}

} // namespace

Bubble make_bubble(const Eigen::VectorXd& center, double lambda)
{
    Bubble b;
    b.center = center;
    b.lambda = lambda;
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw validation_error("bubble rate must be positive and finite");
    for (Eigen::Index k = 0; k < center.size(); ++k)
        if (!std::isfinite(center[k]))
            throw validation_error("bubble center has a non-finite entry");
    return b;
}

double eval_bubble(const Bubble& b, int n, const Eigen::VectorXd& x)
{
    if (n < 5)
        throw validation_error("eval_bubble: dimension must satisfy n >= 5");
    require_bubble(b, n, "eval_bubble");
    if (x.size() != n)
        throw validation_error("eval_bubble: point must be an ambient n-vector");
    if (x[n - 1] < 0.0)
        throw validation_error("eval_bubble: point lies outside the closed half-space");

    double d2 = x[n - 1] * x[n - 1];
    for (int k = 0; k < n - 1; ++k) {
        const double dk = x[k] - b.center[k];
        d2 += dk * dk;
    }
    const double t = b.lambda * b.lambda * d2;
    return bubble_c0(n) * pow_half_nm2(b.lambda / (1.0 + t), n);
}

double eps_ij(const Bubble& bi, const Bubble& bj, int n)
{
    if (n < 5)
        throw validation_error("eps_ij: dimension must satisfy n >= 5");
    require_bubble(bi, n, "eps_ij");
    require_bubble(bj, n, "eps_ij");
    return 1.0 / pow_half_nm2(interaction_base(bi, bj), n);
}

Eigen::VectorXd d_eps_ij_dx(const Bubble& bi, const Bubble& bj, int n)
{
    if (n < 5)
        throw validation_error("d_eps_ij_dx: dimension must satisfy n >= 5");
    require_bubble(bi, n, "d_eps_ij_dx");
    require_bubble(bj, n, "d_eps_ij_dx");
    const double base = interaction_base(bi, bj);
    // eps_ij^{n/(n-2)} = base^{-n/2}
    const double factor = (n - 2) * bi.lambda * bj.lambda / (pow_half_nm2(base, n) * base);
    return factor * (bj.center - bi.center);
}

double pair_inner_product(const Bubble& bi, const Bubble& bj, int n, const IntegratorSpec& spec)
{
    if (n < 5)
        throw validation_error("pair_inner_product: dimension must satisfy n >= 5");
    require_bubble(bi, n, "pair_inner_product");
    require_bubble(bj, n, "pair_inner_product");

    const bool coincident = bi.lambda == bj.lambda && bi.center == bj.center;
    const double c0 = bubble_c0(n);
    const double p = static_cast<double>(n + 2) / (n - 2);

    if (spec.method == IntegratorSpec::Method::radial_adaptive) {
        if (!coincident)
            throw validation_error(
                "pair_inner_product: the radial-adaptive method requires coincident bubbles "
                "(distinct centers break radial symmetry); use importance_mc instead");
        // int_{R^n_+} delta^{p+1} = c0^{p+1} (sigma_{n-1}/2) int_0^inf r^{n-1}(1+r^2)^{-n} dr,
        // independent of the rate after rescaling.
        const double nd = n;
        QuadratureOptions qopts;
        qopts.rel_tol = 1e-12;
        const QuadratureResult r = integrate_zero_to_inf(
            [nd](double s) { return std::pow(s, nd - 1.0) * std::pow(1.0 + s * s, -nd); }, qopts);
        if (!r.converged)
            throw numerical_error("pair_inner_product: radial quadrature failed to converge");
        return std::pow(c0, p + 1.0) * 0.5 * unit_sphere_area(n) * r.value;
    }

    if (spec.samples == 0)
        throw validation_error("pair_inner_product: the Monte Carlo method needs samples > 0");

    std::vector<Bubble> strata;
    strata.push_back(bi);
    if (!coincident)
        strata.push_back(bj);

    const double c0p = std::pow(c0, p);
    const Bubble bl = bi; // local copies so the closure owns its data
    const Bubble br = bj;
    McIntegrand f = [&](const Eigen::VectorXd& x, Eigen::VectorXd& out) {
        double d2i = x[n - 1] * x[n - 1];
        double d2j = d2i;
        for (int k = 0; k < n - 1; ++k) {
            const double di = x[k] - bl.center[k];
            const double dj = x[k] - br.center[k];
            d2i += di * di;
            d2j += dj * dj;
        }
        const double ti = bl.lambda * bl.lambda * d2i;
        const double tj = br.lambda * br.lambda * d2j;
        const double delta_i = c0 * pow_half_nm2(bl.lambda / (1.0 + ti), n);
        // delta_j^p = c0^p (lambda/(1+t))^{(n+2)/2}
        const double yj = br.lambda / (1.0 + tj);
        const double delta_j_p = c0p * pow_half_nm2(yj, n) * yj * yj;
        out[0] = delta_j_p * delta_i;
    };

    McOptions mopts;
    mopts.samples = spec.samples;
    mopts.seed = spec.seed;
    mopts.workers = spec.workers;
    mopts.stream_tag = 0xb0b5u;
    const McResult res = mc_integrate_halfspace(n, strata, 1, f, mopts);

    if (spec.target_rel_err > 0.0) {
        const double scale = std::max(std::abs(res.value[0]), 1e-300);
        if (res.stderr_[0] > spec.target_rel_err * scale)
            throw mc_budget_error("pair_inner_product", res.stderr_[0] / scale, spec.target_rel_err);
    }
    return res.value[0];
}

MEpsReport check_M_eps(const BubbleEnsemble& ens, double C, double mu, const CurvatureModel& model)
{
    const int n = ens.n;
    if (n < 5)
        throw validation_error("check_M_eps: dimension must satisfy n >= 5");
    if (model.n != n)
        throw validation_error("check_M_eps: ensemble and curvature model disagree on the dimension");
    if (!(ens.eps > 0.0) || !(ens.eps < 1.0))
        throw validation_error("check_M_eps: eps must lie in (0, 1)");
    if (!(C >= 1.0) || !std::isfinite(C))
        throw validation_error("check_M_eps: the constant C must satisfy C >= 1");
    if (!(mu > 0.0) || !std::isfinite(mu))
        throw validation_error("check_M_eps: the radius mu must be positive");
    if (ens.bubbles.empty())
        throw validation_error("check_M_eps: the ensemble has no bubbles");
    if (ens.alphas.size() != ens.bubbles.size())
        throw validation_error("check_M_eps: one amplitude per bubble is required");
    if (ens.z.size() != n - 1)
        throw validation_error("check_M_eps: z must have n-1 tangential coordinates");
    for (const Bubble& b : ens.bubbles)
        require_bubble(b, n, "check_M_eps");
    for (double a : ens.alphas)
        if (!(a > 0.0) || !std::isfinite(a))
            throw validation_error("check_M_eps: amplitudes must be positive and finite");

    const int m = ens.m();
    const double eps = ens.eps;
    const double ln_eps = std::log(eps);
    const double amp_rhs = eps * ln_eps * ln_eps;
    const double sep_scale = std::pow(eps, static_cast<double>(n - 2) / n);

    MEpsReport rep;
    auto push = [&rep](std::string constraint, int i, int j, double lhs, double rhs) {
        MEpsEntry e;
        e.constraint = std::move(constraint);
        e.i = i;
        e.j = j;
        e.lhs = lhs;
        e.rhs = rhs;
        e.margin = rhs - lhs;
        e.satisfied = lhs <= rhs;
        rep.entries.push_back(e);
        if (!e.satisfied)
            rep.violations.push_back(e);
    };

    for (int i = 0; i < m; ++i) {
        const Bubble& b = ens.bubbles[i];
        const double K_xi = model.K_at_offset(b.center - ens.z);
        const double amp = ens.alphas[i];
        const double amp_lhs = std::abs(std::pow(amp, 4.0 / (n - 2)) * K_xi - 1.0);
        push("amplitude", i, -1, amp_lhs, amp_rhs);

        const double inv_lambda = 1.0 / b.lambda;
        push("rate_lower", i, -1, eps / C, inv_lambda);
        push("rate_upper", i, -1, inv_lambda, C * eps);

        push("center_offset", i, -1, (b.center - ens.z).norm(), mu);
    }

    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) {
            const double d = (ens.bubbles[i].center - ens.bubbles[j].center).norm();
            push("separation_lower", i, j, sep_scale / C, d);
            push("separation_upper", i, j, d, C * sep_scale);
        }

    rep.ok = rep.violations.empty();
    return rep;
}

} // namespace routh
