#pragma once

// Globally optimal recovery: the intrinsic lower bound
//   lb = sup { ||h|| : ||P h|| <= epsilon, ||Lambda h|| <= eta },
// the regularization map attaining it, and worst-case error bounds for
// arbitrary linear recovery maps.

#include "optrec/linalg.hpp"
#include "optrec/model.hpp"

namespace optrec {

struct GlobalSolution {
    double tau_flat = 0.0;
    double c_flat = 0.0;
    double d_flat = 0.0;  // +inf when eta = 0 and the data constraint must be exact
    double lb = 0.0;
    Matrix map;           // N x m matrix of the regularization map at tau_flat
    Vector extremal;      // h with ||h|| = lb on the boundary of the lb program
};

/// Minimizes ((1 - tau) eps^2 + tau eta^2) / lambda_min((1 - tau) P + tau Lambda^T Lambda)
/// over [0, 1] (1001-point scan, golden-section refinement).
///
/// For eta = 0 the bound has the closed form eps / sqrt(mu), mu the smallest
/// eigenvalue of P compressed to ker(Lambda).
GlobalSolution lower_bound(const ProblemInstance& p, const Geometry& g, double tol = 1e-12);

struct GwceBound {
    double value = 0.0;  // upper bound on the global worst-case error of the map
    double tau = 0.0;
    double c = 0.0;
    double d = 0.0;
};

/// Smallest sqrt(c eps^2 + d eta^2) with diag(c P, d Id_m) >= G^T G, where
/// G = [Id - map*Lambda | map]. For a fixed ratio tau = d/(c + d) the
/// optimal scale is a generalized eigenvalue, so only tau is searched.
///
/// Throws UnboundedGwce when Id - map*Lambda does not vanish on V.
GwceBound gwce_linear_bound(const ProblemInstance& p, const Geometry& g, const Matrix& map,
                            double tol = 1e-12);

/// lambda_min(diag(c P, d Id_m) - G^T G); nonnegative iff (c, d) is feasible
/// for gwce_linear_bound.
double block_constraint_margin(const ProblemInstance& p, const Geometry& g, const Matrix& map,
                               double c, double d);

/// lambda_min(c P + d Lambda^T Lambda - Id); nonnegative iff (c, d) is feasible
/// for the lower-bound program.
double lb_constraint_margin(const Geometry& g, double c, double d);

struct OrthonormalGwce {
    double value = 0.0;
    double tau_sharp0 = 0.0;
    double lambda_sharp0 = 0.0;
};

/// Worst-case error shared by all regularization maps under orthonormal
/// observations, from the tau equation with zero misfit.
OrthonormalGwce gwce_orthonormal(const ProblemInstance& p, const Geometry& g, double tol = 1e-12);

}  // namespace optrec
