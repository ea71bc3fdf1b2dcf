#include "routh/model.hpp"

#include "routh/errors.hpp"

#include <cmath>
#include <string>

namespace routh {

CurvatureModel make_curvature_model(int n, double K_z, double dK_dnu,
                                    const Eigen::MatrixXd& hessK1, double sv_tol)
{
    if (n < 5)
        throw validation_error("model dimension must satisfy n >= 5 (got n = " +
                               std::to_string(n) + ")");
    if (!(K_z > 0.0)) throw validation_error("K_z must be positive");
    if (!std::isfinite(K_z) || !std::isfinite(dK_dnu))
        throw validation_error("model scalars must be finite");
    if (hessK1.rows() != n - 1 || hessK1.cols() != n - 1)
        throw validation_error("hessK1 must be (n-1)x(n-1)");
    if (!hessK1.allFinite()) throw validation_error("hessK1 entries must be finite");

    const double scale = std::max(1.0, hessK1.cwiseAbs().maxCoeff());
    const double asym = (hessK1 - hessK1.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * scale)
        throw validation_error("hessK1 must be symmetric (asymmetry " + std::to_string(asym) +
                               " exceeds tolerance); inputs are used as given, never symmetrized");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hessK1);
    if (es.info() != Eigen::Success)
        throw numerical_error("eigendecomposition of hessK1 failed");
    const double smin = es.eigenvalues().cwiseAbs().minCoeff();
    const double smax = es.eigenvalues().cwiseAbs().maxCoeff();
    if (smin <= sv_tol * std::max(1.0, smax))
        throw validation_error("hessK1 is degenerate: smallest singular value " +
                               std::to_string(smin) + " below tolerance");

    CurvatureModel m;
    m.n = n;
    m.K_z = K_z;
    m.dK_dnu = dK_dnu;
    m.hessK1 = hessK1;
    return m;
}

} // namespace routh
