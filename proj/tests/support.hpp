#pragma once

// Test-side fixtures and reference computations. Nothing here calls the
// solvers: the random generators use <random> and the D1 references come
// from the closed form of lambda_min on that instance.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "optrec/linalg.hpp"
#include "optrec/model.hpp"

namespace optrec::testing {

inline ProblemInstance d1(double eta = 0.5, Vector y = {1.0, 0.3}) {
    const double r = 1.0 / std::sqrt(2.0);
    ProblemInstance p;
    p.lambda = Matrix{{0, 1, 0}, {0, 0, 1}};
    p.vbasis = Matrix{{r}, {r}, {0}};
    p.epsilon = 1.0;
    p.eta = eta;
    p.y = std::move(y);
    return p;
}

/// lambda_min((1 - t) P + t Lambda^T Lambda) on the D1 geometry.
inline double d1_lambda_min(double t) {
    return (1.0 - std::sqrt(t * t + (1.0 - t) * (1.0 - t))) / 2.0;
}

/// Root of the tau equation on D1 geometry by plain bisection.
inline double d1_tau_root(double eps, double eta, double delta) {
    const auto theta = [&](double t) {
        const double num = (1 - t) * (1 - t) * eps * eps - t * t * eta * eta;
        const double den = (1 - t) * eps * eps - t * eta * eta + (1 - t) * t * (1 - 2 * t) * delta * delta;
        return d1_lambda_min(t) - num / den;
    };
    double neg = 0.5, pos = eps / (eps + eta);
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (neg + pos);
        (theta(mid) <= 0.0 ? neg : pos) = mid;
    }
    return 0.5 * (neg + pos);
}

/// Minimizer of ((1 - t) eps^2 + t eta^2) / lambda_min(t) on D1 by ternary search.
inline double d1_phi_argmin(double eps, double eta) {
    const auto phi = [&](double t) { return ((1 - t) * eps * eps + t * eta * eta) / d1_lambda_min(t); };
    double lo = 0.01, hi = 0.99;
    for (int i = 0; i < 300; ++i) {
        const double a = lo + (hi - lo) / 3, b = hi - (hi - lo) / 3;
        if (phi(a) < phi(b)) {
            hi = b;
        } else {
            lo = a;
        }
    }
    return 0.5 * (lo + hi);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}
    double normal() { return dist_(gen_); }
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }
    Vector normal_vector(std::size_t n) {
        Vector v(n);
        for (double& x : v) x = normal();
        return v;
    }
    Matrix normal_matrix(std::size_t r, std::size_t c) {
        Matrix m(r, c);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) m(i, j) = normal();
        return m;
    }

private:
    std::mt19937_64 gen_;
    std::normal_distribution<double> dist_{0.0, 1.0};
};

/// Orthonormal columns spanning the columns of a (modified Gram-Schmidt, twice).
inline Matrix orthonormal_columns(const Matrix& a) {
    std::vector<Vector> q;
    for (std::size_t j = 0; j < a.cols(); ++j) {
        Vector v = a.column(j);
        for (int pass = 0; pass < 2; ++pass)
            for (const Vector& u : q) axpy(-dot(u, v), u, v);
        q.push_back(scaled(v, 1.0 / norm(v)));
    }
    return Matrix::from_columns(a.rows(), q);
}

inline Matrix projector_complement(const Matrix& basis) {
    Matrix p = Matrix::identity(basis.rows());
    if (basis.cols() > 0) p -= basis * basis.transposed();
    return p;
}

struct Shape {
    std::size_t N, m, n;
};

/// 3 <= N <= 6, 2 <= m < N (so ker(Lambda) != {0}), 1 <= n < m.
inline Shape random_shape(Rng& rng) {
    const int N = rng.integer(3, 6);
    const int m = rng.integer(2, std::min(N - 1, 4));
    const int n = rng.integer(1, std::min(2, m - 1));
    return {static_cast<std::size_t>(N), static_cast<std::size_t>(m), static_cast<std::size_t>(n)};
}

/// y generated from a model-consistent element and an admissible error,
/// scaled by `slack` < 1 so the consistent set has nonempty interior.
inline Vector consistent_data(Rng& rng, const Matrix& lambda, const Matrix& vbasis, double eps,
                              double eta, double slack = 0.9) {
    const std::size_t N = lambda.cols();
    const Matrix q = vbasis.cols() > 0 ? orthonormal_columns(vbasis) : Matrix(N, 0);
    const Matrix proj = projector_complement(q);
    Vector f = proj * std::span<const double>(rng.normal_vector(N));
    f = scaled(f, slack * eps * rng.uniform(0.2, 1.0) / norm(f));
    if (vbasis.cols() > 0) axpy(1.0, vbasis * std::span<const double>(rng.normal_vector(vbasis.cols())), f);
    Vector y = lambda * std::span<const double>(f);
    if (eta > 0.0) {
        Vector e = rng.normal_vector(lambda.rows());
        axpy(slack * eta * rng.uniform(0.0, 1.0) / norm(e), e, y);
    }
    return y;
}

/// Lambda with orthonormal rows, m < N, and a generic V of dimension n.
inline ProblemInstance random_orthonormal(Rng& rng, Shape s) {
    ProblemInstance p;
    const Matrix q = orthonormal_columns(rng.normal_matrix(s.N, s.N));
    p.lambda = Matrix(s.m, s.N);
    for (std::size_t i = 0; i < s.m; ++i)
        for (std::size_t j = 0; j < s.N; ++j) p.lambda(i, j) = q(j, i);
    p.vbasis = rng.normal_matrix(s.N, s.n);
    p.epsilon = rng.uniform(0.5, 2.0);
    p.eta = rng.uniform(0.1, 1.0);
    p.y = consistent_data(rng, p.lambda, p.vbasis, p.epsilon, p.eta);
    return p;
}

inline ProblemInstance random_orthonormal(Rng& rng) { return random_orthonormal(rng, random_shape(rng)); }

/// V = {0}, orthonormal Lambda with a nontrivial kernel.
inline ProblemInstance random_ball(Rng& rng) {
    Shape s = random_shape(rng);
    s.n = 0;
    return random_orthonormal(rng, s);
}

/// Gaussian Lambda (not orthonormal).
inline ProblemInstance random_general(Rng& rng) {
    const Shape s = random_shape(rng);
    ProblemInstance p;
    p.lambda = rng.normal_matrix(s.m, s.N);
    p.vbasis = rng.normal_matrix(s.N, s.n);
    p.epsilon = rng.uniform(0.5, 2.0);
    p.eta = rng.uniform(0.1, 1.0);
    p.y = consistent_data(rng, p.lambda, p.vbasis, p.epsilon, p.eta);
    return p;
}

inline double max_diff(std::span<const double> a, std::span<const double> b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

}  // namespace optrec::testing
