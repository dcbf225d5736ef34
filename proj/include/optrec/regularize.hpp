#pragma once

// Solutions of the regularization program
//   minimize (1 - tau) ||P f||^2 + tau ||Lambda f - y||^2
// by three independent routes.

#include <span>

#include "optrec/linalg.hpp"
#include "optrec/model.hpp"

namespace optrec {

/// Endpoint solutions of the regularization program and their misfit.
struct Interpolants {
    Vector f0;           // argmin ||Lambda f - y|| over f in V
    Vector f1;           // argmin ||P f|| subject to Lambda^T Lambda f = Lambda^T y
    double delta = 0.0;  // min ||P f|| subject to Lambda f = y
};

struct RegularizedSolution {
    double tau = 0.0;
    Vector f;
    double model_misfit = 0.0;   // ||P f||
    double data_misfit = 0.0;    // ||Lambda^T Lambda f - Lambda^T y||
    double data_residual = 0.0;  // ||Lambda f - y||
};

Interpolants interpolants(const ProblemInstance& p, const Geometry& g);

/// Regularized solution f_tau.
///
/// For orthonormal observations this is the convex combination
/// (1 - tau) f0 + tau f1; otherwise the normal equations are solved.
/// Throws DomainError when tau is outside [0, 1].
RegularizedSolution regularize(const ProblemInstance& p, const Geometry& g, double tau);
RegularizedSolution regularize(const ProblemInstance& p, const Geometry& g,
                               const Interpolants& interp, double tau);

/// Always solves ((1 - tau) P + tau Lambda^T Lambda) f = tau Lambda^T y, except at
/// the endpoints tau = 0 and tau = 1 where the interpolants are returned.
RegularizedSolution regularize_normal_equations(const ProblemInstance& p, const Geometry& g,
                                                double tau);

/// f_tau = tau * sum a_i u_i + sum b_j v_j with b = (C^T C)^{-1} C^T y and
/// a = y - C b. Only m x n and n x n quantities are formed.
///
/// Requires orthonormal observations and n >= 1 (DomainError otherwise).
RegularizedSolution regularize_cross_gramian(const ProblemInstance& p, const Geometry& g,
                                             double tau, std::span<const double> y);

/// Matrix (N x m) of the linear map y -> f_tau, assembled column by column.
Matrix regularization_map(const ProblemInstance& p, const Geometry& g, double tau);

struct MinimaxPoint {
    double tau = 0.0;
    Vector f;
    double ratio = 0.0;  // max(||P f|| / eps, ||Lambda f - y|| / eta)
};

/// Most interior point of the consistent set along the regularization path.
///
/// ratio < 1 means the consistent set has nonempty interior, ratio > 1 that
/// it is empty. With eta = 0 the data constraint is an equality, the point
/// is f1, and ratio is infinite unless Lambda f1 reproduces y.
MinimaxPoint minimax_point(const ProblemInstance& p, const Geometry& g);

}  // namespace optrec
