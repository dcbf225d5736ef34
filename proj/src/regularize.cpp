#include "optrec/regularize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "minimize.hpp"
#include "optrec/errors.hpp"

namespace optrec {

namespace {

void check_tau(double tau) {
    if (!(tau >= 0.0 && tau <= 1.0)) {
        std::ostringstream os;
        os << "tau = " << tau << " is outside [0, 1]";
        throw DomainError(os.str());
    }
}

RegularizedSolution with_misfits(const ProblemInstance& p, const Geometry& g, double tau,
                                 Vector f, std::span<const double> y) {
    RegularizedSolution s;
    s.tau = tau;
    s.model_misfit = norm(g.P.matrix() * std::span<const double>(f));
    const Vector lf = p.lambda * std::span<const double>(f);
    const Vector residual = sub(lf, y);
    s.data_residual = norm(residual);
    s.data_misfit = norm(transpose_times(p.lambda, residual));
    s.f = std::move(f);
    return s;
}

// Minimum-norm least-squares solution of Lambda f = y.
Vector pseudo_inverse_apply(const ProblemInstance& p) {
    const Spectrum s = sym_eigen(SymMatrix::symmetrized(gram(p.lambda)));
    const double cutoff = 1e-10 * std::max(s.eigenvalues.back(), 1e-300);
    const Vector lty = transpose_times(p.lambda, p.y);
    Vector f(p.N(), 0.0);
    for (std::size_t k = 0; k < s.eigenvalues.size(); ++k) {
        const double mu = s.eigenvalues[k];
        if (mu <= cutoff) continue;
        const Vector q = s.eigenvector(k);
        axpy(dot(q, lty) / mu, q, f);
    }
    return f;
}

}  // namespace

Interpolants interpolants(const ProblemInstance& p, const Geometry& g) {
    const std::size_t N = p.N();
    Interpolants out;

    if (p.n() == 0) {
        out.f0.assign(N, 0.0);
    } else {
        const Matrix lb = p.lambda * g.basis;
        const Vector coeff = solve_spd(SymMatrix::symmetrized(gram(lb)), transpose_times(lb, p.y));
        out.f0 = g.basis * std::span<const double>(coeff);
    }

    // f1 = fp + Z z with fp the minimum-norm solution and Z spanning ker(Lambda);
    // z minimizes ||P (fp + Z z)||, and Z^T P Z is definite because V meets
    // ker(Lambda) trivially.
    out.f1 = pseudo_inverse_apply(p);
    const Matrix z = observation_kernel(p);
    if (z.cols() > 0) {
        const Matrix zt = z.transposed();
        const SymMatrix reduced = SymMatrix::symmetrized(zt * (g.P.matrix() * z));
        Vector rhs = zt * std::span<const double>(g.P.matrix() * std::span<const double>(out.f1));
        for (double& x : rhs) x = -x;
        const Vector coeff = solve_spd(reduced, rhs);
        axpy(1.0, z * std::span<const double>(coeff), std::span<double>(out.f1));
    }

    out.delta = g.orthonormal ? norm(sub(out.f1, out.f0))
                              : norm(g.P.matrix() * std::span<const double>(out.f1));
    return out;
}

RegularizedSolution regularize(const ProblemInstance& p, const Geometry& g, double tau) {
    check_tau(tau);
    return regularize(p, g, interpolants(p, g), tau);
}

RegularizedSolution regularize(const ProblemInstance& p, const Geometry& g,
                               const Interpolants& interp, double tau) {
    check_tau(tau);
    if (!g.orthonormal) return regularize_normal_equations(p, g, tau);
    Vector f = scaled(interp.f0, 1.0 - tau);
    axpy(tau, interp.f1, f);
    return with_misfits(p, g, tau, std::move(f), p.y);
}

RegularizedSolution regularize_normal_equations(const ProblemInstance& p, const Geometry& g,
                                                double tau) {
    check_tau(tau);
    if (tau == 0.0 || tau == 1.0) {
        Interpolants interp = interpolants(p, g);
        return with_misfits(p, g, tau, tau == 0.0 ? std::move(interp.f0) : std::move(interp.f1),
                            p.y);
    }
    const Vector rhs = scaled(transpose_times(p.lambda, p.y), tau);
    return with_misfits(p, g, tau, solve_spd(blended_operator(g, tau), rhs), p.y);
}

RegularizedSolution regularize_cross_gramian(const ProblemInstance& p, const Geometry& g,
                                             double tau, std::span<const double> y) {
    check_tau(tau);
    if (!g.orthonormal) throw DomainError("cross-Gramian route requires orthonormal observations");
    if (p.n() == 0) throw DomainError("cross-Gramian route requires dim(V) >= 1");
    if (y.size() != p.m()) throw ValidationError("y: length mismatch");

    const Matrix& c = g.C;
    Vector b;
    try {
        b = solve_spd(SymMatrix::symmetrized(gram(c)), transpose_times(c, y));
    } catch (const RankDeficiencyError& e) {
        throw InfiniteWorstCaseError(std::string("cross-Gramian C^T C is singular: ") + e.what());
    }
    const Vector a = sub(y, c * std::span<const double>(b));

    Vector f = scaled(transpose_times(p.lambda, a), tau);
    axpy(1.0, p.vbasis * std::span<const double>(b), std::span<double>(f));
    return with_misfits(p, g, tau, std::move(f), y);
}

Matrix regularization_map(const ProblemInstance& p, const Geometry& g, double tau) {
    check_tau(tau);
    Matrix map(p.N(), p.m());
    ProblemInstance column_problem = p;
    for (std::size_t i = 0; i < p.m(); ++i) {
        column_problem.y = unit_vector(p.m(), i);
        map.set_column(i, regularize(column_problem, g, tau).f);
    }
    return map;
}

MinimaxPoint minimax_point(const ProblemInstance& p, const Geometry& g) {
    const Interpolants interp = interpolants(p, g);
    const auto ratio_at = [&](const RegularizedSolution& s) {
        const double model = s.model_misfit / p.epsilon;
        if (p.eta == 0.0) {
            const double slack = 1e-10 * std::max(1.0, norm(p.y));
            return s.data_residual <= slack ? model : std::numeric_limits<double>::infinity();
        }
        return std::max(model, s.data_residual / p.eta);
    };

    if (p.eta == 0.0) {
        RegularizedSolution s = regularize(p, g, interp, 1.0);
        const double r = ratio_at(s);
        return {1.0, std::move(s.f), r};
    }

    const auto objective = [&](double tau) { return ratio_at(regularize(p, g, interp, tau)); };
    const detail::ScalarMin best = detail::grid_golden_minimize(objective, 0.0, 1.0, 201, 1e-13);
    RegularizedSolution s = regularize(p, g, interp, best.x);
    return {best.x, std::move(s.f), best.value};
}

}  // namespace optrec
