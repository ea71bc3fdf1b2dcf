#pragma once

#include <Eigen/Dense>

namespace routh {

// Local data of the prescribed curvature function K at a boundary point z,
// expressed in a boundary-normal chart centered at z:
//   n        ambient dimension (n >= 5),
//   K_z      K(z) > 0,
//   dK_dnu   outward normal derivative of K at z,
//   hessK1   (n-1)x(n-1) Hessian at z of the boundary restriction of K
//            (z is assumed a critical point of that restriction, so there is
//            no linear tangential term).
//
// hessK1 must be symmetric and non-degenerate; it is used exactly as given
// (no symmetrization).
struct CurvatureModel {
    int n = 0;
    double K_z = 0.0;
    double dK_dnu = 0.0;
    Eigen::MatrixXd hessK1;

    int dim() const { return n - 1; }

    // Boundary value of the local quadratic model at tangential offset
    // y = x' - z:  K(x) = K_z + (1/2) <hessK1 y, y>.
    double K_at_offset(const Eigen::VectorXd& y) const
    {
        return K_z + 0.5 * y.dot(hessK1 * y);
    }
};

// Validates and returns the model.  Throws validation_error when n < 5,
// K_z <= 0, hessK1 has the wrong shape, is asymmetric beyond an absolute
// 1e-12 (relative to its largest entry), or has smallest singular value
// <= sv_tol * max(1, spectral norm).  The sign of dK_dnu is not restricted
// here; assembly-time operations enforce their own regime requirements.
CurvatureModel make_curvature_model(int n, double K_z, double dK_dnu,
                                    const Eigen::MatrixXd& hessK1, double sv_tol = 1e-10);

} // namespace routh
