#include "routh/critical_points.hpp"

#include "routh/errors.hpp"
#include "routh/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace routh {
namespace {

bool value_then_lex_less(const CriticalPointReport& a, const CriticalPointReport& b)
{
    const double scale = std::max({1.0, std::abs(a.value), std::abs(b.value)});
    if (std::abs(a.value - b.value) > 1e-9 * scale) return a.value < b.value;
    const Eigen::VectorXd va = stack(a.cfg);
    const Eigen::VectorXd vb = stack(b.cfg);
    if (va.size() != vb.size()) return va.size() < vb.size();
    for (Eigen::Index i = 0; i < va.size(); ++i)
        if (va[i] != vb[i]) return va[i] < vb[i];
    return false;
}

} // namespace

CriticalPointReport classify_critical_point(const CurvatureModel& model, const Configuration& cfg,
                                            const std::string& method, double nondeg_tol)
{
    CriticalPointReport rep;
    rep.cfg = cfg;
    rep.method = method;
    rep.value = eval_F(model, cfg);
    rep.grad_norm = grad_F_stacked(model, cfg).norm();

    const Eigen::MatrixXd H = hess_F(model, cfg);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    if (es.info() != Eigen::Success)
        throw numerical_error("Hessian eigendecomposition failed at a reported critical point");

    rep.hessian_spectrum.assign(es.eigenvalues().data(),
                                es.eigenvalues().data() + es.eigenvalues().size());
    std::sort(rep.hessian_spectrum.begin(), rep.hessian_spectrum.end());

    rep.morse_index = 0;
    for (double ev : rep.hessian_spectrum)
        if (ev < 0.0) ++rep.morse_index;

    const double spectral_norm = std::max(std::abs(rep.hessian_spectrum.front()),
                                          std::abs(rep.hessian_spectrum.back()));
    double min_abs = spectral_norm;
    for (double ev : rep.hessian_spectrum) min_abs = std::min(min_abs, std::abs(ev));
    rep.nondegenerate = min_abs > nondeg_tol * spectral_norm;
    return rep;
}

CriticalPointReport closed_form_m2(const CurvatureModel& model, int eig_index, double nondeg_tol)
{
    const int d = model.dim();
    if (eig_index < 0 || eig_index >= d)
        throw validation_error("eig_index out of range [0, n-2]");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(model.hessK1);
    if (es.info() != Eigen::Success) throw numerical_error("eigendecomposition of hessK1 failed");

    const double lambda = es.eigenvalues()[eig_index]; // ascending order
    if (!(lambda > 0.0))
        throw validation_error("the selected eigenvalue must be positive (got " +
                               std::to_string(lambda) + ")");

    const double cbar = (model.n - 2) / std::pow(2.0, model.n - 1);
    const double radius = std::pow(cbar / lambda, 1.0 / model.n);
    const Eigen::VectorXd xbar = radius * es.eigenvectors().col(eig_index);

    CriticalPointReport rep = classify_critical_point(model, {xbar, -xbar}, "closed_form", nondeg_tol);

    const double scale = std::max(1.0, model.hessK1.cwiseAbs().maxCoeff() * radius);
    if (rep.grad_norm > 1e-12 * scale)
        throw numerical_error("closed-form two-point critical point failed gradient verification");
    return rep;
}

CriticalPointReport newton_solve(const CurvatureModel& model, const Configuration& initial,
                                 const NewtonOptions& opts)
{
    validate_configuration(model, initial);
    const int d = model.dim();
    const int m = static_cast<int>(initial.size());

    Eigen::VectorXd y = stack(initial);
    bool regularized = false;
    int collision_rejects = 0;
    int singular_rejects = 0;

    Configuration cfg = initial;
    Eigen::VectorXd g = grad_F_stacked(model, cfg);
    double mu = 0.0;

    for (int iter = 0; iter < opts.max_iter; ++iter) {
        if (g.norm() <= opts.tol) {
            CriticalPointReport rep = classify_critical_point(model, cfg, "newton");
            if (regularized) rep.notes = "regularized Newton system";
            return rep;
        }

        const Eigen::MatrixXd H = hess_F(model, cfg);
        const double h_scale = std::max(1.0, H.cwiseAbs().maxCoeff());
        const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(H.rows(), H.cols());

        bool accepted = false;
        collision_rejects = 0;
        singular_rejects = 0;
        for (int attempt = 0; attempt < 60 && !accepted; ++attempt) {
            const Eigen::PartialPivLU<Eigen::MatrixXd> lu(H + mu * id);
            const Eigen::VectorXd s = lu.solve(-g);
            const bool solve_ok = s.allFinite() && ((H + mu * id) * s + g).norm() <= 1e-8 * std::max(1.0, g.norm());
            if (!solve_ok) {
                ++singular_rejects;
                regularized = true;
                mu = std::max(mu * 10.0, 1e-10 * h_scale);
                continue;
            }

            const Eigen::VectorXd y_cand = y + s;
            Configuration cand = unstack(y_cand, m, d);
            if (m > 1 && min_separation(cand) < separation_guard) {
                ++collision_rejects;
                mu = std::max(mu * 10.0, 1e-10 * h_scale);
                continue;
            }

            const Eigen::VectorXd g_cand = grad_F_stacked(model, cand);
            if (g_cand.norm() < g.norm()) {
                y = y_cand;
                cfg = std::move(cand);
                g = g_cand;
                mu *= 0.25;
                if (mu < 1e-14 * h_scale) mu = 0.0;
                accepted = true;
            } else {
                if (mu > 0.0) regularized = true;
                mu = std::max(mu * 10.0, 1e-10 * h_scale);
            }
        }

        if (!accepted) {
            if (collision_rejects > 0 && collision_rejects >= singular_rejects)
                throw newton_error(newton_error::Reason::collision_path,
                                   "Newton path forced a pair below the separation guard");
            if (singular_rejects > 0)
                throw newton_error(newton_error::Reason::singular_system,
                                   "Newton system singular beyond recoverable regularization");
            throw newton_error(newton_error::Reason::max_iter_exceeded,
                               "Newton stalled: no decreasing step found");
        }
    }

    if (g.norm() <= opts.tol) {
        CriticalPointReport rep = classify_critical_point(model, cfg, "newton");
        if (regularized) rep.notes = "regularized Newton system";
        return rep;
    }
    throw newton_error(newton_error::Reason::max_iter_exceeded,
                       "Newton did not reach tolerance within max_iter iterations");
}

bool permutation_equal(const Configuration& a, const Configuration& b, double rel_tol)
{
    if (a.size() != b.size()) return false;
    const std::size_t m = a.size();

    double scale = 1.0;
    for (const auto& p : a) scale = std::max(scale, p.norm());
    for (const auto& p : b) scale = std::max(scale, p.norm());
    const double tol = rel_tol * scale;

    if (m <= 8) {
        std::vector<std::size_t> perm(m);
        std::iota(perm.begin(), perm.end(), 0);
        do {
            bool all = true;
            for (std::size_t i = 0; i < m && all; ++i)
                all = (a[i] - b[perm[i]]).norm() <= tol;
            if (all) return true;
        } while (std::next_permutation(perm.begin(), perm.end()));
        return false;
    }

    // Greedy matching for large m; adequate because duplicates produced by the
    // search are near-exact copies.
    std::vector<bool> used(m, false);
    for (std::size_t i = 0; i < m; ++i) {
        bool matched = false;
        for (std::size_t j = 0; j < m && !matched; ++j) {
            if (!used[j] && (a[i] - b[j]).norm() <= tol) {
                used[j] = true;
                matched = true;
            }
        }
        if (!matched) return false;
    }
    return true;
}

std::vector<CriticalPointReport> deflated_search(const CurvatureModel& model, int m, int n_seeds,
                                                 std::uint64_t seed, const NewtonOptions& opts)
{
    if (m < 1) throw validation_error("deflated_search requires m >= 1");
    if (n_seeds < 1) throw validation_error("deflated_search requires n_seeds >= 1");
    const int d = model.dim();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(model.hessK1);
    if (es.info() != Eigen::Success) throw numerical_error("eigendecomposition of hessK1 failed");
    const double lambda_max = es.eigenvalues()[d - 1];

    const double cbar = (model.n - 2) / std::pow(2.0, model.n - 1);
    const bool have_ring = lambda_max > 0.0;
    const double r0 = have_ring ? std::pow(cbar / lambda_max, 1.0 / model.n) : 1.0;
    const Eigen::VectorXd e1 = es.eigenvectors().col(d - 1);
    const Eigen::VectorXd e2 = es.eigenvectors().col(d - 2);

    std::vector<CriticalPointReport> found;
    for (int k = 0; k < n_seeds; ++k) {
        NormalGen gen(mix_seed(seed, /*tag=*/0x5eedULL, static_cast<std::uint64_t>(k)));

        Configuration start(m, Eigen::VectorXd::Zero(d));
        const bool pure_random = !have_ring || (k > 0 && k % 5 == 0);
        for (int i = 0; i < m; ++i) {
            if (!pure_random) {
                const double theta = 2.0 * EIGEN_PI * i / m;
                start[i] = r0 * (std::cos(theta) * e1 + std::sin(theta) * e2);
            }
            if (k > 0 || pure_random) {
                const double sigma = pure_random ? 1.2 * r0 : 0.3 * r0;
                for (int c = 0; c < d; ++c) start[i][c] += sigma * gen();
            }
        }
        if (m > 1 && min_separation(start) < 1e-6 * r0) continue;

        try {
            CriticalPointReport rep = newton_solve(model, start, opts);
            bool duplicate = false;
            for (const auto& prev : found)
                if (permutation_equal(prev.cfg, rep.cfg)) {
                    duplicate = true;
                    break;
                }
            if (!duplicate) found.push_back(std::move(rep));
        } catch (const newton_error&) {
            // Non-convergent seeds carry no information; an empty result is valid.
        }
    }

    std::sort(found.begin(), found.end(), value_then_lex_less);
    return found;
}

int auto_eig_index(const CurvatureModel& model)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(model.hessK1);
    if (es.info() != Eigen::Success) throw numerical_error("eigendecomposition of hessK1 failed");
    const Eigen::VectorXd& ev = es.eigenvalues();
    const int d = static_cast<int>(ev.size());
    const double tol = 1e-8 * std::max(1.0, ev.cwiseAbs().maxCoeff());
    for (int i = d - 1; i >= 0; --i) {
        if (!(ev[i] > 0.0)) break; // ascending order: everything below is non-positive too
        const bool simple =
            (i == 0 || ev[i] - ev[i - 1] > tol) && (i == d - 1 || ev[i + 1] - ev[i] > tol);
        if (simple) return i;
    }
    return -1;
}

namespace {

void append_note(std::string& notes, const std::string& extra)
{
    if (!notes.empty()) notes += "; ";
    notes += extra;
}

} // namespace

std::vector<CriticalPointReport> find_critical_points(const CurvatureModel& model, int m,
                                                      int n_seeds, std::uint64_t seed,
                                                      int eig_index, std::string& notes)
{
    if (m < 1) throw validation_error("find_critical_points requires m >= 1");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(model.hessK1);
    if (es.info() != Eigen::Success) throw numerical_error("eigendecomposition of hessK1 failed");
    if (m > 1 && es.eigenvalues().maxCoeff() <= 0.0) {
        append_note(notes,
                    "no critical points exist: the confinement form has no positive direction, "
                    "so the cluster function decreases strictly along every radial ray and its "
                    "gradient never vanishes");
        return {};
    }

    std::vector<CriticalPointReport> pts;
    if (m == 2) {
        int idx = eig_index;
        if (idx < 0) idx = auto_eig_index(model);
        if (idx >= 0) {
            if (eig_index >= 0) {
                pts.push_back(closed_form_m2(model, idx)); // explicit index: errors propagate
            } else {
                try {
                    pts.push_back(closed_form_m2(model, idx));
                } catch (const validation_error& e) {
                    append_note(notes, std::string("closed-form two-point construction skipped: ") +
                                           e.what());
                }
            }
        } else {
            append_note(notes, "closed-form two-point construction skipped: no simple positive "
                               "eigenvalue of hessK1");
        }
    }

    if (n_seeds > 0) {
        std::vector<CriticalPointReport> found = deflated_search(model, m, n_seeds, seed);
        for (CriticalPointReport& r : found) {
            bool dup = false;
            for (const CriticalPointReport& p : pts)
                if (permutation_equal(p.cfg, r.cfg)) {
                    dup = true;
                    break;
                }
            if (!dup) pts.push_back(std::move(r));
        }
    }
    std::sort(pts.begin(), pts.end(), value_then_lex_less);
    return pts;
}

} // namespace routh
