#include "routh/hamiltonian.hpp"

#include "routh/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace routh {
namespace {

double inv_pow(double dist, int exponent)
{
    return std::pow(dist, -static_cast<double>(exponent));
}

} // namespace

double min_separation(const Configuration& cfg)
{
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cfg.size(); ++i)
        for (std::size_t j = i + 1; j < cfg.size(); ++j)
            best = std::min(best, (cfg[i] - cfg[j]).norm());
    return best;
}

void validate_configuration(const CurvatureModel& model, const Configuration& cfg)
{
    if (cfg.empty()) throw validation_error("configuration must contain at least one point");
    for (const auto& p : cfg) {
        if (p.size() != model.dim())
            throw validation_error("configuration points must lie in R^{n-1} (expected dimension " +
                                   std::to_string(model.dim()) + ")");
        if (!p.allFinite()) throw validation_error("configuration points must be finite");
    }
    if (cfg.size() > 1 && min_separation(cfg) < separation_guard)
        throw std::domain_error("coincident points: pairwise separation below guard " +
                                std::to_string(separation_guard));
}

double eval_F(const CurvatureModel& model, const Configuration& cfg)
{
    validate_configuration(model, cfg);
    const int n = model.n;
    double quad = 0.0;
    for (const auto& xi : cfg) quad += 0.5 * xi.dot(model.hessK1 * xi);

    double pair = 0.0;
    for (std::size_t i = 0; i < cfg.size(); ++i)
        for (std::size_t j = i + 1; j < cfg.size(); ++j)
            pair += inv_pow((cfg[i] - cfg[j]).norm(), n - 2);
    return quad + pair;
}

std::vector<Eigen::VectorXd> grad_F(const CurvatureModel& model, const Configuration& cfg)
{
    validate_configuration(model, cfg);
    const int n = model.n;
    const std::size_t m = cfg.size();

    std::vector<Eigen::VectorXd> g(m);
    for (std::size_t i = 0; i < m; ++i) g[i] = model.hessK1 * cfg[i];
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            const Eigen::VectorXd d = cfg[i] - cfg[j];
            const Eigen::VectorXd force = (n - 2) * inv_pow(d.norm(), n) * d;
            g[i] -= force;
            g[j] += force;
        }
    }
    return g;
}

Eigen::VectorXd grad_F_stacked(const CurvatureModel& model, const Configuration& cfg)
{
    const auto blocks = grad_F(model, cfg);
    Eigen::VectorXd v(static_cast<Eigen::Index>(blocks.size()) * model.dim());
    for (std::size_t i = 0; i < blocks.size(); ++i)
        v.segment(static_cast<Eigen::Index>(i) * model.dim(), model.dim()) = blocks[i];
    return v;
}

Eigen::MatrixXd hess_F(const CurvatureModel& model, const Configuration& cfg)
{
    validate_configuration(model, cfg);
    const int n = model.n;
    const int d = model.dim();
    const std::size_t m = cfg.size();

    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m * d, m * d);
    for (std::size_t i = 0; i < m; ++i) H.block(i * d, i * d, d, d) = model.hessK1;

    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(d, d);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            const Eigen::VectorXd diff = cfg[i] - cfg[j];
            const double r = diff.norm();
            const Eigen::MatrixXd phi =
                (n - 2) * (n * inv_pow(r, n + 2) * (diff * diff.transpose()) - inv_pow(r, n) * id);
            H.block(i * d, i * d, d, d) += phi;
            H.block(j * d, j * d, d, d) += phi;
            H.block(i * d, j * d, d, d) -= phi;
            H.block(j * d, i * d, d, d) -= phi;
        }
    }
    return H;
}

RadialForm radial_form(const CurvatureModel& model, const Configuration& direction, double r)
{
    validate_configuration(model, direction);
    if (!(r > 0.0)) throw validation_error("radial_form requires r > 0");

    double norm2 = 0.0;
    for (const auto& L : direction) norm2 += L.squaredNorm();
    if (std::abs(std::sqrt(norm2) - 1.0) > 1e-9)
        throw validation_error("radial_form requires a unit direction (stacked norm 1)");

    const int n = model.n;
    double quad = 0.0;
    for (const auto& L : direction) quad += L.dot(model.hessK1 * L);

    double pair = 0.0;
    for (std::size_t i = 0; i < direction.size(); ++i)
        for (std::size_t j = i + 1; j < direction.size(); ++j)
            pair += inv_pow((direction[i] - direction[j]).norm(), n - 2);

    RadialForm out;
    out.value = 0.5 * r * r * quad + inv_pow(r, n - 2) * pair;
    out.d_dr = r * quad - (n - 2) * inv_pow(r, n - 1) * pair;
    return out;
}

Eigen::VectorXd stack(const Configuration& cfg)
{
    if (cfg.empty()) return {};
    const Eigen::Index d = cfg.front().size();
    Eigen::VectorXd v(static_cast<Eigen::Index>(cfg.size()) * d);
    for (std::size_t i = 0; i < cfg.size(); ++i) v.segment(static_cast<Eigen::Index>(i) * d, d) = cfg[i];
    return v;
}

Configuration unstack(const Eigen::VectorXd& v, int m, int dim)
{
    if (v.size() != static_cast<Eigen::Index>(m) * dim)
        throw validation_error("unstack: size mismatch");
    Configuration cfg(m);
    for (int i = 0; i < m; ++i) cfg[i] = v.segment(static_cast<Eigen::Index>(i) * dim, dim);
    return cfg;
}

} // namespace routh
