#include "optrec/global.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "minimize.hpp"
#include "optrec/errors.hpp"
#include "optrec/local.hpp"
#include "optrec/regularize.hpp"

namespace optrec {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

GlobalSolution exact_data_bound(const ProblemInstance& p, const Geometry& g) {
    GlobalSolution sol;
    const Matrix z = observation_kernel(p);
    if (z.cols() == 0) {
        // Lambda is injective: the data pins f down and lb = 0.
        sol.tau_flat = 1.0;
        sol.c_flat = 0.0;
        sol.d_flat = 1.0 / lambda_min(g.LtL);
        sol.lb = 0.0;
        sol.extremal.assign(p.N(), 0.0);
        sol.map = regularization_map(p, g, 1.0);
        return sol;
    }
    const Spectrum s = sym_eigen(SymMatrix::symmetrized(z.transposed() * (g.P.matrix() * z)));
    const double mu = s.eigenvalues.front();
    sol.c_flat = 1.0 / mu;
    sol.lb = p.epsilon / std::sqrt(mu);
    sol.extremal = scaled(z * std::span<const double>(s.eigenvector(0)), sol.lb);
    if (lb_constraint_margin(g, sol.c_flat, 0.0) >= -1e-12 * sol.c_flat) {
        sol.tau_flat = 0.0;
        sol.d_flat = 0.0;
    } else {
        sol.tau_flat = 1.0;
        sol.d_flat = kInf;
    }
    sol.map = regularization_map(p, g, sol.tau_flat);
    return sol;
}

double max_abs_on_v(const Matrix& residual_op, const Geometry& g) {
    if (g.basis.cols() == 0) return 0.0;
    return max_abs(residual_op * g.basis);
}

// Maximizer of the lb program from the spectrum at tau_flat. When lambda_min
// is (nearly) multiple, as at an eigenvalue crossing, the maximizer mixes the
// bottom eigenvectors so that both constraints are active. The result is
// scaled onto the boundary, so it is feasible even for an approximate tau.
Vector extremal_element(const ProblemInstance& p, const Geometry& g, const Spectrum& s, double lb) {
    const auto feasible_scale = [&](const Vector& u) {
        const double pu = norm(g.P.matrix() * std::span<const double>(u));
        const double lu = norm(p.lambda * std::span<const double>(u));
        return std::min(pu > 0.0 ? p.epsilon / pu : kInf, lu > 0.0 ? p.eta / lu : kInf);
    };
    Vector best = s.eigenvector(0);
    double best_t = feasible_scale(best);

    const double lmin = s.eigenvalues.front();
    const double gap = 1e-7 * std::max(1.0, std::abs(s.eigenvalues.back()));
    std::vector<Vector> bottom;
    for (std::size_t k = 0; k < s.eigenvalues.size() && s.eigenvalues[k] <= lmin + gap; ++k)
        bottom.push_back(s.eigenvector(k));
    if (bottom.size() > 1) {
        const Matrix e = Matrix::from_columns(p.N(), bottom);
        const auto offer = [&](const Vector& z) {
            const Vector u = e * std::span<const double>(z);
            const double t = feasible_scale(u);
            if (t > best_t) {
                best = u;
                best_t = t;
            }
        };
        const Matrix pe = g.P.matrix() * e;
        const Matrix qp = e.transposed() * pe;
        const Matrix ql = e.transposed() * (g.LtL.matrix() * e);
        // Elements of the eigenspace that load one constraint least.
        offer(sym_eigen(SymMatrix::symmetrized(qp)).eigenvector(0));
        offer(sym_eigen(SymMatrix::symmetrized(ql)).eigenvector(0));
        // ||P u||^2 = (eps/lb)^2 balances the two constraints.
        if (std::isfinite(lb) && lb > 0.0) {
            Matrix q = qp;
            const double target = p.epsilon * p.epsilon / (lb * lb);
            for (std::size_t i = 0; i < q.rows(); ++i) q(i, i) -= target;
            const Spectrum qs = sym_eigen(SymMatrix::symmetrized(q));
            const double lo = qs.eigenvalues.front(), hi = qs.eigenvalues.back();
            if (lo < 0.0 && hi > 0.0) {
                Vector z = scaled(qs.eigenvector(0), std::sqrt(hi / (hi - lo)));
                axpy(std::sqrt(-lo / (hi - lo)), qs.eigenvector(qs.eigenvalues.size() - 1), z);
                offer(z);
            }
        }
    }
    return scaled(best, best_t);
}

}  // namespace

double lb_constraint_margin(const Geometry& g, double c, double d) {
    Matrix m = c * g.P.matrix();
    m += d * g.LtL.matrix();
    m -= Matrix::identity(g.P.dim());
    return lambda_min(SymMatrix::symmetrized(std::move(m)));
}

GlobalSolution lower_bound(const ProblemInstance& p, const Geometry& g, double tol) {
    if (p.eta == 0.0) return exact_data_bound(p, g);

    const double e2 = p.epsilon * p.epsilon, h2 = p.eta * p.eta;
    const auto phi = [&](double tau) {
        const SymMatrix a = blended_operator(g, tau);
        const double lmin = lambda_min(a);
        if (lmin <= 1e-13 * std::max(1.0, max_abs(a.matrix()))) return kInf;
        return ((1.0 - tau) * e2 + tau * h2) / lmin;
    };
    const double xtol = std::clamp(tol, 1e-15, 1e-8);
    detail::ScalarMin best = detail::grid_golden_minimize(phi, 0.0, 1.0, 1001, xtol);
    if (!std::isfinite(best.value))
        throw ValidationError("lambda_min((1 - tau) P + tau Lambda^T Lambda) vanishes for every tau");

    // Golden section only resolves tau to about sqrt(machine epsilon) on a
    // flat minimum. phi' has the sign of (eta^2 - eps^2) lambda - N lambda',
    // with lambda' = ||Lambda u||^2 - ||P u||^2, which has no cancellation;
    // bisecting on it pins tau down to rounding (also at an eigenvalue kink).
    const auto slope = [&](double tau) {
        const Spectrum sp = sym_eigen(blended_operator(g, tau));
        const Vector u = sp.eigenvector(0);
        const double pu = norm(g.P.matrix() * std::span<const double>(u));
        const double lu = norm(p.lambda * std::span<const double>(u));
        return (h2 - e2) * sp.eigenvalues.front() - ((1.0 - tau) * e2 + tau * h2) * (lu * lu - pu * pu);
    };
    if (best.x > 0.0 && best.x < 1.0) {
        double lo = std::max(0.0, best.x - 1e-3), hi = std::min(1.0, best.x + 1e-3);
        if (slope(lo) < 0.0 && slope(hi) > 0.0) {
            for (int it = 0; it < 200 && hi - lo > 4e-16; ++it) {
                const double mid = 0.5 * (lo + hi);
                (slope(mid) < 0.0 ? lo : hi) = mid;
            }
            const double x = 0.5 * (lo + hi);
            const double v = phi(x);
            if (v <= best.value * (1.0 + 1e-13)) best = {x, v};
        }
    }

    const Spectrum s = sym_eigen(blended_operator(g, best.x));
    const double lmin = s.eigenvalues.front();
    GlobalSolution sol;
    sol.tau_flat = best.x;
    sol.c_flat = (1.0 - best.x) / lmin;
    sol.d_flat = best.x / lmin;
    sol.lb = std::sqrt(best.value);
    sol.extremal = extremal_element(p, g, s, sol.lb);
    sol.map = regularization_map(p, g, best.x);
    return sol;
}

double block_constraint_margin(const ProblemInstance& p, const Geometry& g, const Matrix& map,
                               double c, double d) {
    const std::size_t N = p.N(), m = p.m();
    const Matrix residual_op = Matrix::identity(N) - map * p.lambda;
    Matrix gmat(N, N + m);
    for (std::size_t i = 0; i < N; ++i) {
        for (std::size_t j = 0; j < N; ++j) gmat(i, j) = residual_op(i, j);
        for (std::size_t j = 0; j < m; ++j) gmat(i, N + j) = map(i, j);
    }
    Matrix diff = -1.0 * gram(gmat);
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j) diff(i, j) += c * g.P(i, j);
    for (std::size_t i = 0; i < m; ++i) diff(N + i, N + i) += d;
    return lambda_min(SymMatrix::symmetrized(std::move(diff)));
}

GwceBound gwce_linear_bound(const ProblemInstance& p, const Geometry& g, const Matrix& map,
                            double tol) {
    const std::size_t N = p.N(), m = p.m();
    if (map.rows() != N || map.cols() != m) {
        std::ostringstream os;
        os << "map: expected " << N << " x " << m << ", got " << map.rows() << " x " << map.cols();
        throw ValidationError(os.str());
    }
    const Matrix residual_op = Matrix::identity(N) - map * p.lambda;
    const double op_scale = std::max(1.0, max_abs(map) * max_abs(p.lambda) * static_cast<double>(N));
    const double leak = max_abs_on_v(residual_op, g);
    if (leak > 1e-8 * op_scale) {
        std::ostringstream os;
        os << "Id - map*Lambda does not vanish on V (max residual " << leak
           << "): the worst-case error is infinite";
        throw UnboundedGwce(os.str());
    }

    // K = G^T G restricted to range(P) x R^m: [[P R^T R P, P R^T D], [D^T R P, D^T D]]
    // with R = Id - map*Lambda and D = map.
    const Matrix rp = residual_op * g.P.matrix();
    Matrix top(N, N + m);
    for (std::size_t i = 0; i < N; ++i) {
        for (std::size_t j = 0; j < N; ++j) top(i, j) = rp(i, j);
        for (std::size_t j = 0; j < m; ++j) top(i, N + j) = map(i, j);
    }
    const Matrix k = gram(top);

    const double e2 = p.epsilon * p.epsilon, h2 = p.eta * p.eta;
    const bool zero_map = max_abs(map) <= 1e-14;
    const bool exact_map = max_abs(residual_op) <= 1e-12 * op_scale;

    // Smallest s with diag(s(1 - t) P, s t Id) >= K.
    const auto scale_at = [&](double t) {
        const double wf = t < 1.0 ? 1.0 / std::sqrt(1.0 - t) : (exact_map ? 0.0 : kInf);
        const double wd = t > 0.0 ? 1.0 / std::sqrt(t) : (zero_map ? 0.0 : kInf);
        if (!std::isfinite(wf) || !std::isfinite(wd)) return kInf;
        Matrix scaled_k = k;
        for (std::size_t i = 0; i < N + m; ++i)
            for (std::size_t j = 0; j < N + m; ++j)
                scaled_k(i, j) *= (i < N ? wf : wd) * (j < N ? wf : wd);
        const Spectrum s = sym_eigen(SymMatrix::symmetrized(std::move(scaled_k)));
        return std::max(s.eigenvalues.back(), 0.0);
    };
    const auto objective = [&](double t) {
        const double s = scale_at(t);
        if (!std::isfinite(s)) return kInf;
        return s * ((1.0 - t) * e2 + t * h2);
    };

    const double xtol = std::clamp(tol, 1e-15, 1e-8);
    const detail::ScalarMin best = detail::grid_golden_minimize(objective, 0.0, 1.0, 201, xtol);
    if (!std::isfinite(best.value)) throw UnboundedGwce("no finite feasible multipliers");
    const double s = scale_at(best.x);
    return {std::sqrt(best.value), best.x, s * (1.0 - best.x), s * best.x};
}

OrthonormalGwce gwce_orthonormal(const ProblemInstance& p, const Geometry& g, double tol) {
    if (!g.orthonormal) throw DomainError("orthonormal gwce requires Lambda Lambda^T = Id");
    if (p.n() == 0) throw DomainError("orthonormal gwce requires dim(V) >= 1");

    const bool identity_obs = max_abs(g.LtL.matrix() - Matrix::identity(p.N())) <= 1e-10;
    if (p.eta == 0.0 || identity_obs) {
        const GlobalSolution lb = lower_bound(p, g, tol);
        return {lb.lb, lb.tau_flat, lambda_min(blended_operator(g, lb.tau_flat))};
    }
    const TauRoot root = solve_tau_equation(g, p.epsilon, p.eta, 0.0, tol);
    const double e2 = p.epsilon * p.epsilon, h2 = p.eta * p.eta;
    const double v2 = ((1.0 - root.tau) * e2 + root.tau * h2) / root.lambda;
    return {std::sqrt(std::max(v2, 0.0)), root.tau, root.lambda};
}

}  // namespace optrec
