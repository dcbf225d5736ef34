#include "optrec/local.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "minimize.hpp"
#include "optrec/errors.hpp"

namespace optrec {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_orthonormal(const Geometry& g, const char* route) {
    if (!g.orthonormal) {
        std::ostringstream os;
        os << route << " route requires orthonormal observations (Lambda Lambda^T = Id)";
        throw DomainError(os.str());
    }
}

void check_consistent(double delta, double epsilon, double eta) {
    if (delta > (epsilon + eta) * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "consistent set is empty: data misfit " << delta << " exceeds epsilon + eta = "
           << epsilon + eta;
        throw EmptyConsistentSet(os.str());
    }
}

bool observations_are_identity(const Geometry& g) {
    return max_abs(g.LtL.matrix() - Matrix::identity(g.LtL.dim())) <= 1e-10;
}

struct FractionParts {
    double num = 0.0, den = 0.0, dnum = 0.0, dden = 0.0;
};

FractionParts fraction(double eps, double eta, double delta, double tau) {
    const double e2 = eps * eps, h2 = eta * eta, d2 = delta * delta;
    const double s = 1.0 - tau;
    FractionParts f;
    f.num = s * s * e2 - tau * tau * h2;
    f.den = s * e2 - tau * h2 + s * tau * (1.0 - 2.0 * tau) * d2;
    f.dnum = -2.0 * s * e2 - 2.0 * tau * h2;
    f.dden = d2 * (1.0 - 6.0 * tau + 6.0 * tau * tau) - e2 - h2;
    return f;
}

// Derivative of lambda_min(A(tau)) for orthogonal projectors P and
// Lambda^T Lambda; falls back to the Rayleigh quotient derivative where
// the closed form is singular (lambda = 1/2).
double lambda_min_slope(const Geometry& g, double tau, double lambda, std::span<const double> h) {
    if (std::abs(1.0 - 2.0 * lambda) > 1e-8 && tau > 0.0 && tau < 1.0)
        return ((1.0 - 2.0 * tau) / (tau * (1.0 - tau))) * (lambda * (1.0 - lambda) / (1.0 - 2.0 * lambda));
    const double hp = dot(h, g.P.matrix() * h);
    const double hl = dot(h, g.LtL.matrix() * h);
    return (hl - hp) / dot(h, h);
}

LocalSolution swapped_ball(const ProblemInstance& p, const Geometry& g, const Interpolants& interp) {
    // Lambda is orthogonal: the data constraint is the ball ||f - f1|| <= eta
    // and the roles of the two constraints in the ball case are exchanged.
    const double delta = interp.delta;
    LocalSolution sol;
    sol.route = LocalRoute::eigen_equation;
    sol.tau_sharp = delta > p.epsilon ? p.epsilon / delta : 1.0;
    const double weight = 1.0 - sol.tau_sharp;
    sol.center = regularize(p, g, interp, sol.tau_sharp).f;
    sol.radius = std::sqrt(std::max(p.eta * p.eta - weight * weight * delta * delta, 0.0));
    if (weight > 0.0 && p.n() > 0) {
        CenterCertificate cert;
        cert.h_sharp = scaled(g.basis.column(0), sol.radius);
        cert.a = weight / sol.tau_sharp;
        cert.b = 1.0;
        sol.certificate = std::move(cert);
    }
    return sol;
}

LocalSolution exact_data_center(const ProblemInstance& p, const Geometry& g,
                                const Interpolants& interp) {
    LocalSolution sol;
    sol.route = LocalRoute::eigen_equation;
    sol.tau_sharp = 1.0;
    sol.lambda_sharp = lambda_min(g.LtL);
    sol.center = interp.f1;
    const Matrix z = observation_kernel(p);
    if (z.cols() == 0) {
        sol.radius = 0.0;
        return sol;
    }
    const double mu = lambda_min(SymMatrix::symmetrized(z.transposed() * (g.P.matrix() * z)));
    const double slack = p.epsilon * p.epsilon - interp.delta * interp.delta;
    sol.radius = std::sqrt(std::max(slack, 0.0) / mu);
    return sol;
}

}  // namespace

std::string_view to_string(LocalRoute r) noexcept {
    switch (r) {
        case LocalRoute::ball: return "ball";
        case LocalRoute::eigen_equation: return "eigen_equation";
        case LocalRoute::reduced_sdp: return "reduced_sdp";
    }
    return "unknown";
}

double tau_equation_residual(const Geometry& g, double epsilon, double eta, double delta,
                             double tau) {
    const FractionParts f = fraction(epsilon, eta, delta, tau);
    return lambda_min(blended_operator(g, tau)) - f.num / f.den;
}

TauRoot solve_tau_equation(const Geometry& g, double epsilon, double eta, double delta,
                           double tol) {
    check_consistent(delta, epsilon, eta);
    if (eta == 0.0) return {1.0, lambda_min(g.LtL), 0};
    if (std::abs(epsilon - eta) <= 1e-14 * epsilon) return {0.5, lambda_min(blended_operator(g, 0.5)), 0};

    const auto theta = [&](double tau, double* slope) {
        const Spectrum s = sym_eigen(blended_operator(g, tau));
        const double lambda = s.eigenvalues.front();
        const FractionParts f = fraction(epsilon, eta, delta, tau);
        if (slope) {
            const double dl = lambda_min_slope(g, tau, lambda, s.eigenvector(0));
            *slope = dl - (f.dnum * f.den - f.num * f.dden) / (f.den * f.den);
        }
        return std::pair{lambda - f.num / f.den, lambda};
    };

    // neg/pos are the bracket ends where theta <= 0 and theta >= 0.
    double neg = 0.5;
    double pos = epsilon / (epsilon + eta);
    const auto [theta_neg, lambda_neg] = theta(neg, nullptr);
    const auto [theta_pos, lambda_pos] = theta(pos, nullptr);
    if (theta_neg == 0.0) return {neg, lambda_neg, 0};
    if (theta_pos == 0.0) return {pos, lambda_pos, 0};
    if (theta_neg > 1e-12 || theta_pos < -1e-12) {
        std::ostringstream os;
        os.precision(17);
        os << "no sign change of the tau equation: theta(" << neg << ") = " << theta_neg
           << ", theta(" << pos << ") = " << theta_pos << " (delta = " << delta << ")";
        throw RootNotFoundError(os.str());
    }

    double x = 0.5 * (neg + pos);
    TauRoot best{x, 0.0, 0};
    double best_abs = kInf;
    for (int it = 1; it <= 200; ++it) {
        double slope = 0.0;
        const auto [t, lambda] = theta(x, &slope);
        if (std::abs(t) < best_abs) {
            best_abs = std::abs(t);
            best = {x, lambda, it};
        }
        if (std::abs(t) <= tol) break;
        (t < 0.0 ? neg : pos) = x;
        if (std::abs(pos - neg) <= 4.0 * std::numeric_limits<double>::epsilon()) break;

        const double lo = std::min(neg, pos), hi = std::max(neg, pos);
        const double newton = x - t / slope;
        x = (std::isfinite(newton) && newton > lo && newton < hi) ? newton : 0.5 * (lo + hi);
    }
    return best;
}

TauRoot solve_tau_equation(const ProblemInstance& p, const Geometry& g, const Interpolants& interp,
                           double tol) {
    require_orthonormal(g, "tau equation");
    return solve_tau_equation(g, p.epsilon, p.eta, interp.delta, tol);
}

LocalSolution chebyshev_center_orthonormal(const ProblemInstance& p, const Geometry& g,
                                           double tol) {
    require_orthonormal(g, "eigenvalue");
    if (p.n() == 0) throw DomainError("eigenvalue route requires dim(V) >= 1; use the ball route");

    const Interpolants interp = interpolants(p, g);
    check_consistent(interp.delta, p.epsilon, p.eta);
    if (observations_are_identity(g)) return swapped_ball(p, g, interp);
    if (p.eta == 0.0) return exact_data_center(p, g, interp);

    const TauRoot root = solve_tau_equation(g, p.epsilon, p.eta, interp.delta, tol);
    const double tau = root.tau;
    const Spectrum s = sym_eigen(blended_operator(g, tau));
    const double lambda = s.eigenvalues.front();

    LocalSolution sol;
    sol.route = LocalRoute::eigen_equation;
    sol.tau_sharp = tau;
    sol.lambda_sharp = lambda;
    sol.center = regularize(p, g, interp, tau).f;
    const double e2 = p.epsilon * p.epsilon, h2 = p.eta * p.eta, d2 = interp.delta * interp.delta;
    const double r2 = ((1.0 - tau) * e2 + tau * h2 - (1.0 - tau) * tau * d2) / lambda;
    sol.radius = std::sqrt(std::max(r2, 0.0));
    sol.certificate = CenterCertificate{scaled(s.eigenvector(0), sol.radius), (1.0 - tau) / lambda,
                                        tau / lambda};
    return sol;
}

LocalSolution chebyshev_center_ball(const ProblemInstance& p, const Geometry& g) {
    require_orthonormal(g, "ball");
    if (p.n() != 0) throw DomainError("ball route requires V = {0}");
    const Matrix kernel = observation_kernel(p);
    if (kernel.cols() == 0) throw DomainError("ball route requires ker(Lambda) != {0}");

    const double ny = norm(p.y);
    check_consistent(ny, p.epsilon, p.eta);

    LocalSolution sol;
    sol.route = LocalRoute::ball;
    sol.tau_sharp = ny > p.eta ? 1.0 - p.eta / ny : 0.0;
    sol.center = scaled(transpose_times(p.lambda, p.y), sol.tau_sharp);
    const double tn = sol.tau_sharp * ny;
    sol.radius = std::sqrt(std::max(p.epsilon * p.epsilon - tn * tn, 0.0));
    if (sol.tau_sharp > 0.0 && sol.tau_sharp < 1.0) {
        sol.certificate = CenterCertificate{scaled(kernel.column(0), sol.radius), 1.0,
                                            sol.tau_sharp / (1.0 - sol.tau_sharp)};
    }
    return sol;
}

LocalSolution chebyshev_center_sdp(const ProblemInstance& p, const Geometry& g, double tol) {
    if (p.eta == 0.0)
        throw StrictFeasibilityError("eta = 0: the consistent set has empty interior");
    const MinimaxPoint interior = minimax_point(p, g);
    if (interior.ratio > 1.0 + 1e-12) {
        std::ostringstream os;
        os << "consistent set is empty: every point violates a constraint by a factor of at least "
           << interior.ratio;
        throw EmptyConsistentSet(os.str());
    }
    if (interior.ratio >= 1.0 - 1e-12) {
        std::ostringstream os;
        os << "consistent set has empty interior (best constraint ratio " << interior.ratio << ")";
        throw StrictFeasibilityError(os.str());
    }

    const Vector w = transpose_times(p.lambda, p.y);
    const double e2 = p.epsilon * p.epsilon, h2 = p.eta * p.eta, y2 = dot(p.y, p.y);
    const double scale = e2 + h2 + y2;

    // Objective of the relaxation after eliminating the Schur variable and the scale.
    const auto objective = [&](double tau) {
        const Spectrum s = sym_eigen(blended_operator(g, tau));
        const double lmin = s.eigenvalues.front();
        if (lmin <= 1e-13 * std::max(1.0, s.eigenvalues.back())) return kInf;
        double quad = 0.0;
        for (std::size_t k = 0; k < s.eigenvalues.size(); ++k) {
            const double c = dot(s.eigenvector(k), w);
            quad += c * c / s.eigenvalues[k];
        }
        const double slope = (1.0 - tau) * e2 + tau * (h2 - y2) + tau * tau * quad;
        if (slope < -1e-10 * scale) {
            std::ostringstream os;
            os.precision(17);
            os << "relaxation objective slope is negative at tau = " << tau << " (slope = " << slope
               << ", lambda_min = " << lmin << ")";
            throw NumericalGuardError(os.str());
        }
        return std::max(slope, 0.0) / lmin;
    };

    const double xtol = std::clamp(tol, 1e-15, 1e-8);
    const detail::ScalarMin best = detail::grid_golden_minimize(objective, 0.0, 1.0, 401, xtol);
    if (!std::isfinite(best.value))
        throw NumericalGuardError("relaxation objective is infinite on the whole tau grid");

    LocalSolution sol;
    sol.route = LocalRoute::reduced_sdp;
    sol.tau_sharp = best.x;
    sol.center = regularize_normal_equations(p, g, best.x).f;
    sol.radius = std::sqrt(best.value);
    return sol;
}

LocalSolution chebyshev_center(const ProblemInstance& p, const Geometry& g, LocalMethod method,
                               double tol) {
    switch (method) {
        case LocalMethod::eigen: return chebyshev_center_orthonormal(p, g, tol);
        case LocalMethod::ball: return chebyshev_center_ball(p, g);
        case LocalMethod::sdp: return chebyshev_center_sdp(p, g, tol);
        case LocalMethod::automatic: break;
    }
    if (g.orthonormal && p.n() == 0 && p.m() < p.N()) return chebyshev_center_ball(p, g);
    if (g.orthonormal && p.n() > 0) return chebyshev_center_orthonormal(p, g, tol);
    return chebyshev_center_sdp(p, g, tol);
}

}  // namespace optrec
