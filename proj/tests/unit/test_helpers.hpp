#pragma once

#include "routh/hamiltonian.hpp"
#include "routh/model.hpp"
#include "routh/rng.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace testutil {

// n = 5, K_z = 1, dK_dnu = 1, hessK1 = diag(2, 1, 1, 1): the workhorse model
// with a simple positive top eigenvalue.
inline routh::CurvatureModel model_diag2111()
{
    Eigen::MatrixXd H = Eigen::MatrixXd::Identity(4, 4);
    H(0, 0) = 2.0;
    return routh::make_curvature_model(5, 1.0, 1.0, H);
}

inline routh::CurvatureModel model_identity5()
{
    return routh::make_curvature_model(5, 1.0, 1.0, Eigen::MatrixXd::Identity(4, 4));
}

inline routh::CurvatureModel model_negated5()
{
    return routh::make_curvature_model(5, 1.0, 1.0, -Eigen::MatrixXd::Identity(4, 4));
}

// Random symmetric matrix with entries O(1); nudged away from singularity.
inline Eigen::MatrixXd random_symmetric(int d, routh::NormalGen& gen)
{
    Eigen::MatrixXd A(d, d);
    for (int r = 0; r < d; ++r)
        for (int c = 0; c <= r; ++c) {
            const double v = gen();
            A(r, c) = v;
            A(c, r) = v;
        }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    if (es.eigenvalues().cwiseAbs().minCoeff() < 1e-3)
        A += 0.5 * Eigen::MatrixXd::Identity(d, d);
    return A;
}

// Random symmetric matrix whose largest eigenvalue is positive and simple
// (separated from the rest by at least `gap`).
inline Eigen::MatrixXd random_simple_top(int d, routh::NormalGen& gen, double gap = 0.5)
{
    Eigen::MatrixXd A = random_symmetric(d, gen);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    Eigen::VectorXd ev = es.eigenvalues();
    const double top = ev[d - 1];
    const double want = std::max(top, ev[d - 2] + gap);
    A += (want + gap - top) * es.eigenvectors().col(d - 1) *
         es.eigenvectors().col(d - 1).transpose();
    return A;
}

inline routh::Configuration random_configuration(int m, int d, routh::NormalGen& gen,
                                                 double spread = 1.0)
{
    routh::Configuration cfg;
    for (int i = 0; i < m; ++i) {
        Eigen::VectorXd p(d);
        for (int c = 0; c < d; ++c)
            p[c] = spread * gen();
        cfg.push_back(p);
    }
    if (m > 1 && routh::min_separation(cfg) < 0.1 * spread)
        for (int i = 0; i < m; ++i)
            cfg[static_cast<std::size_t>(i)][0] += 2.0 * spread * i;
    return cfg;
}

} // namespace testutil
