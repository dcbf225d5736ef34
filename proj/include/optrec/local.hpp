#pragma once

// Locally optimal recovery: the Chebyshev center and radius of the set of
// elements consistent with both the model and the observed data,
//   { f : ||P f|| <= epsilon, ||Lambda f - y|| <= eta }.

#include <optional>
#include <string_view>

#include "optrec/linalg.hpp"
#include "optrec/model.hpp"
#include "optrec/regularize.hpp"

namespace optrec {

enum class LocalRoute { ball, eigen_equation, reduced_sdp };
enum class LocalMethod { automatic, eigen, ball, sdp };

std::string_view to_string(LocalRoute r) noexcept;

/// Multipliers and extremal direction proving that `center` is the
/// Chebyshev center (checked by check_center_certificate).
struct CenterCertificate {
    Vector h_sharp;
    double a = 0.0;
    double b = 0.0;
};

struct LocalSolution {
    double tau_sharp = 0.0;
    std::optional<double> lambda_sharp;  // eigenvalue route only
    Vector center;
    double radius = 0.0;
    std::optional<CenterCertificate> certificate;
    LocalRoute route = LocalRoute::eigen_equation;
};

struct TauRoot {
    double tau = 0.0;
    double lambda = 0.0;  // lambda_min((1 - tau) P + tau Lambda^T Lambda)
    int iterations = 0;
};

/// theta(tau) = lambda_min(A(tau)) - N(tau)/D(tau) with
///   N = (1 - tau)^2 eps^2 - tau^2 eta^2,
///   D = (1 - tau) eps^2 - tau eta^2 + (1 - tau) tau (1 - 2 tau) delta^2.
double tau_equation_residual(const Geometry& g, double epsilon, double eta, double delta,
                             double tau);

/// Root of theta between 1/2 and eps/(eps + eta), by safeguarded Newton
/// iteration inside a bisection bracket.
///
/// eta = 0 gives tau = 1. When eps = eta the bracket collapses and
/// tau = 1/2 is returned (both constraints saturate there for any delta).
/// Throws EmptyConsistentSet when delta > eps + eta.
TauRoot solve_tau_equation(const Geometry& g, double epsilon, double eta, double delta,
                           double tol = 1e-12);
TauRoot solve_tau_equation(const ProblemInstance& p, const Geometry& g, const Interpolants& interp,
                           double tol = 1e-12);

/// Orthonormal observations, dim(V) >= 1.
LocalSolution chebyshev_center_orthonormal(const ProblemInstance& p, const Geometry& g,
                                           double tol = 1e-12);

/// V = {0}, orthonormal observations and ker(Lambda) != {0}.
LocalSolution chebyshev_center_ball(const ProblemInstance& p, const Geometry& g);

/// Any validated instance whose consistent set has nonempty interior.
/// The radius is the value of the relaxation, an upper bound on the true
/// Chebyshev radius (tight whenever the relaxation is exact).
LocalSolution chebyshev_center_sdp(const ProblemInstance& p, const Geometry& g,
                                   double tol = 1e-12);

/// Route selection: ball when V = {0} (orthonormal, nontrivial kernel),
/// eigen when orthonormal, sdp otherwise.
LocalSolution chebyshev_center(const ProblemInstance& p, const Geometry& g,
                               LocalMethod method = LocalMethod::automatic, double tol = 1e-12);

}  // namespace optrec
