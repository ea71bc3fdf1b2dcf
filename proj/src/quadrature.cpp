#include "routh/quadrature.hpp"

#include "routh/errors.hpp"

#include <cmath>
#include <vector>

namespace routh {
namespace {

// Gauss-Kronrod 7-15 nodes and weights (positive half; node 0 included once).
constexpr double kron_nodes[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
};

constexpr double kron_weights[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
};

// Embedded 7-point Gauss weights, matching kron_nodes[1], [3], [5], [7].
constexpr double gauss_weights[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
};

struct PanelEstimate {
    double kronrod;
    double error;
};

PanelEstimate gk15(const std::function<double(double)>& f, double a, double b,
                   std::int64_t& evals)
{
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);

    double fk[8][2];
    for (int i = 0; i < 7; ++i) {
        fk[i][0] = f(mid - half * kron_nodes[i]);
        fk[i][1] = f(mid + half * kron_nodes[i]);
    }
    fk[7][0] = f(mid);
    fk[7][1] = 0.0;
    evals += 15;

    double resk = kron_weights[7] * fk[7][0];
    double resg = gauss_weights[3] * fk[7][0];
    for (int i = 0; i < 7; ++i) resk += kron_weights[i] * (fk[i][0] + fk[i][1]);
    for (int i = 0; i < 3; ++i) resg += gauss_weights[i] * (fk[2 * i + 1][0] + fk[2 * i + 1][1]);

    // QUADPACK dqk15 error estimate: scale |K - G| by the integrand's
    // deviation-from-mean mass so that nearly-exact panels report tiny errors.
    const double reskh = resk * 0.5;
    double resasc = kron_weights[7] * std::abs(fk[7][0] - reskh);
    for (int i = 0; i < 7; ++i)
        resasc += kron_weights[i] * (std::abs(fk[i][0] - reskh) + std::abs(fk[i][1] - reskh));
    resasc *= std::abs(half);

    double err = std::abs((resk - resg) * half);
    if (resasc != 0.0 && err != 0.0)
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));

    return {resk * half, err};
}

} // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           const QuadratureOptions& opts)
{
    struct Panel {
        double a, b, value, error;
        int depth;
    };

    QuadratureResult res;
    if (!(a < b)) {
        res.converged = true;
        return res;
    }

    PanelEstimate first = gk15(f, a, b, res.evaluations);
    std::vector<Panel> heap{{a, b, first.kronrod, first.error, 0}};
    double total = first.kronrod;
    double total_err = first.error;

    auto tol = [&](double t) { return std::max(opts.abs_tol, opts.rel_tol * std::abs(t)); };

    while (total_err > tol(total)) {
        // Pop the worst panel.
        std::size_t worst = 0;
        for (std::size_t i = 1; i < heap.size(); ++i)
            if (heap[i].error > heap[worst].error) worst = i;
        Panel p = heap[worst];
        heap[worst] = heap.back();
        heap.pop_back();

        if (p.depth >= opts.max_depth || res.evaluations >= opts.max_evaluations) {
            res.value = total;
            res.error_estimate = total_err;
            res.converged = false;
            return res;
        }

        const double mid = 0.5 * (p.a + p.b);
        PanelEstimate left = gk15(f, p.a, mid, res.evaluations);
        PanelEstimate right = gk15(f, mid, p.b, res.evaluations);

        total += left.kronrod + right.kronrod - p.value;
        total_err += left.error + right.error - p.error;
        heap.push_back({p.a, mid, left.kronrod, left.error, p.depth + 1});
        heap.push_back({mid, p.b, right.kronrod, right.error, p.depth + 1});
    }

    res.value = total;
    res.error_estimate = total_err;
    res.converged = std::isfinite(total);
    return res;
}

QuadratureResult integrate_zero_to_inf(const std::function<double(double)>& f,
                                       const QuadratureOptions& opts)
{
    auto transformed = [&f](double t) {
        if (t >= 1.0) return 0.0;
        const double one_minus = 1.0 - t;
        const double r = t / one_minus;
        const double v = f(r) / (one_minus * one_minus);
        return std::isfinite(v) ? v : 0.0;
    };
    return integrate(transformed, 0.0, 1.0, opts);
}

} // namespace routh
