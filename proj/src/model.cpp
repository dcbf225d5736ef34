#include "optrec/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "optrec/errors.hpp"

namespace optrec {

namespace {

constexpr double kOrthonormalTol = 1e-10;
constexpr double kRankTol = 1e-10;
constexpr double kKernelRelTol = 1e-10;

bool all_finite(std::span<const double> xs) {
    return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

void check_shapes(const ProblemInstance& p) {
    if (p.m() == 0 || p.N() == 0) throw ValidationError("lambda: need at least one row and one column");
    if (p.vbasis.rows() != p.N() && !(p.n() == 0)) {
        std::ostringstream os;
        os << "v_basis: columns have length " << p.vbasis.rows() << ", expected N = " << p.N();
        throw ValidationError(os.str());
    }
    if (p.y.size() != p.m()) {
        std::ostringstream os;
        os << "y: length " << p.y.size() << " does not match the " << p.m() << " observations";
        throw ValidationError(os.str());
    }
    if (!all_finite(p.lambda.data())) throw ValidationError("lambda: non-finite entry");
    if (!all_finite(p.vbasis.data())) throw ValidationError("v_basis: non-finite entry");
    if (!all_finite(p.y)) throw ValidationError("y: non-finite entry");
    if (!(std::isfinite(p.epsilon) && p.epsilon > 0.0))
        throw ValidationError("epsilon: must be a positive finite number");
    if (!(std::isfinite(p.eta) && p.eta >= 0.0))
        throw ValidationError("eta: must be a nonnegative finite number");
}

// Gram-Schmidt with one reorthogonalization pass per column.
Matrix orthonormal_basis(const Matrix& vbasis) {
    const std::size_t N = vbasis.rows();
    std::vector<Vector> q;
    for (std::size_t j = 0; j < vbasis.cols(); ++j) {
        Vector v = vbasis.column(j);
        const double original = norm(v);
        for (int pass = 0; pass < 2; ++pass)
            for (const Vector& qk : q) axpy(-dot(qk, v), qk, v);
        const double r = norm(v);
        if (!(original > 0.0) || r <= kRankTol * original) {
            std::ostringstream os;
            os << "v_basis: column " << j << " is linearly dependent on the previous columns";
            throw ValidationError(os.str());
        }
        q.push_back(scaled(v, 1.0 / r));
    }
    return Matrix::from_columns(N, q);
}

// Smallest singular value of an m x n matrix (n <= m), read off the
// spectrum of the symmetric embedding [[0, A], [A^T, 0]].
double smallest_singular_value(const Matrix& a) {
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    Matrix j(m + n, m + n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t k = 0; k < n; ++k) {
            j(i, m + k) = a(i, k);
            j(m + k, i) = a(i, k);
        }
    const Spectrum s = sym_eigen(SymMatrix::symmetrized(std::move(j)));
    // Ascending spectrum: -sigma_1..-sigma_n, (m - n) zeros, sigma_n..sigma_1.
    return s.eigenvalues[m];
}

}  // namespace

Geometry validate(const ProblemInstance& p) {
    check_shapes(p);
    const std::size_t N = p.N();
    const std::size_t n = p.n();

    Geometry g;
    g.basis = n == 0 ? Matrix(N, 0) : orthonormal_basis(p.vbasis);
    if (n > p.m()) {
        std::ostringstream os;
        os << "dim(V) = " << n << " exceeds the number of observations m = " << p.m()
           << ", so V intersects ker(Lambda)";
        throw InfiniteWorstCaseError(os.str());
    }
    if (n > 0) {
        const double smin = smallest_singular_value(p.lambda * g.basis);
        if (smin <= kRankTol) {
            std::ostringstream os;
            os << "V intersects ker(Lambda) (smallest singular value of Lambda on V = " << smin
               << ")";
            throw InfiniteWorstCaseError(os.str());
        }
    }

    Matrix proj = Matrix::identity(N);
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j)
            for (std::size_t k = 0; k < n; ++k) proj(i, j) -= g.basis(i, k) * g.basis(j, k);
    g.P = SymMatrix::symmetrized(std::move(proj));
    g.LtL = SymMatrix::symmetrized(gram(p.lambda));
    g.C = n == 0 ? Matrix(p.m(), 0) : p.lambda * p.vbasis;

    const Matrix llt = p.lambda * p.lambda.transposed();
    g.orthonormal = max_abs(llt - Matrix::identity(p.m())) <= kOrthonormalTol;
    return g;
}

OrthonormalizedInstance orthonormalize(const ProblemInstance& p) {
    check_shapes(p);
    const std::size_t m = p.m();
    const Matrix llt = p.lambda * p.lambda.transposed();
    if (max_abs(llt - Matrix::identity(m)) <= kOrthonormalTol) {
        return {p, Matrix::identity(m)};
    }
    SymMatrix transform;
    try {
        transform = inv_sqrt_psd(SymMatrix::symmetrized(llt));
    } catch (const RankDeficiencyError& e) {
        std::ostringstream os;
        os << "lambda: observation functionals are linearly dependent (rows do not span an "
           << m << "-dimensional row space; lambda_min(Lambda Lambda^T) = " << e.lambda_min()
           << ")";
        throw RankDeficiencyError(os.str(), e.lambda_min());
    }
    OrthonormalizedInstance out{p, transform.matrix()};
    out.instance.lambda = transform.matrix() * p.lambda;
    out.instance.y = transform.matrix() * std::span<const double>(p.y);
    return out;
}

SymMatrix blended_operator(const Geometry& g, double tau) {
    Matrix a = (1.0 - tau) * g.P.matrix();
    a += tau * g.LtL.matrix();
    return SymMatrix::symmetrized(std::move(a));
}

Matrix observation_kernel(const ProblemInstance& p) {
    const Spectrum s = sym_eigen(SymMatrix::symmetrized(gram(p.lambda)));
    const double cutoff = kKernelRelTol * std::max(s.eigenvalues.back(), 1e-300);
    std::vector<Vector> cols;
    for (std::size_t k = 0; k < s.eigenvalues.size(); ++k)
        if (s.eigenvalues[k] <= cutoff) cols.push_back(s.eigenvector(k));
    return Matrix::from_columns(p.N(), cols);
}

}  // namespace optrec
