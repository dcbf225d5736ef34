#include "optrec/linalg.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>
#include <sstream>

#include "optrec/errors.hpp"

namespace optrec {

namespace {

constexpr double kAbsFloor = 1e-14;
constexpr double kSymTol = 1e-12;
constexpr double kSpdRelTol = 1e-12;
constexpr int kMaxSweeps = 100;

void require_same_shape(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ValidationError("matrix shape mismatch");
    }
}

void require_spd(const Spectrum& s, const char* what) {
    const double lmax = s.eigenvalues.empty() ? 0.0 : s.eigenvalues.back();
    const double lmin = s.eigenvalues.empty() ? 0.0 : s.eigenvalues.front();
    if (!(lmin > kSpdRelTol * std::max(lmax, kAbsFloor))) {
        std::ostringstream os;
        os << what << ": matrix is not positive definite (lambda_min = " << lmin
           << ", lambda_max = " << lmax << ")";
        throw RankDeficiencyError(os.str(), lmin);
    }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw ValidationError("ragged matrix initializer");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::diagonal(std::span<const double> d) {
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
}

Matrix Matrix::from_columns(std::size_t rows, const std::vector<Vector>& cols) {
    Matrix m(rows, cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) m.set_column(j, cols[j]);
    return m;
}

Vector Matrix::column(std::size_t j) const {
    Vector v(rows_);
    for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
    return v;
}

void Matrix::set_column(std::size_t j, std::span<const double> v) {
    if (v.size() != rows_) throw ValidationError("column length mismatch");
    for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = v[i];
}

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

Matrix& Matrix::operator+=(const Matrix& other) {
    require_same_shape(*this, other);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
    require_same_shape(*this, other);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
    return *this;
}

Matrix& Matrix::operator*=(double s) {
    for (double& x : data_) x *= s;
    return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(double s, Matrix a) { return a *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw ValidationError("matrix product shape mismatch");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

Vector operator*(const Matrix& a, std::span<const double> x) {
    if (a.cols() != x.size()) throw ValidationError("matrix-vector shape mismatch");
    Vector y(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) y[i] = dot(a.row(i), x);
    return y;
}

Matrix gram(const Matrix& a) {
    const std::size_t n = a.cols();
    Matrix g(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < a.rows(); ++k) s += a(k, i) * a(k, j);
            g(i, j) = s;
            g(j, i) = s;
        }
    return g;
}

Vector transpose_times(const Matrix& a, std::span<const double> x) {
    if (a.rows() != x.size()) throw ValidationError("transpose-vector shape mismatch");
    Vector y(a.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) y[j] += a(i, j) * x[i];
    return y;
}

double frobenius_norm(const Matrix& a) { return norm(a.data()); }

double max_abs(const Matrix& a) {
    double m = 0.0;
    for (double x : a.data()) m = std::max(m, std::abs(x));
    return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(std::span<const double> a) {
    // Scaled accumulation avoids overflow for the (rare) huge inputs.
    double scale = 0.0;
    for (double x : a) scale = std::max(scale, std::abs(x));
    if (scale == 0.0) return 0.0;
    double s = 0.0;
    for (double x : a) {
        const double r = x / scale;
        s += r * r;
    }
    return scale * std::sqrt(s);
}

Vector add(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    Vector c(a.begin(), a.end());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] += b[i];
    return c;
}

Vector sub(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    Vector c(a.begin(), a.end());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] -= b[i];
    return c;
}

Vector scaled(std::span<const double> a, double s) {
    Vector c(a.begin(), a.end());
    for (double& x : c) x *= s;
    return c;
}

void axpy(double s, std::span<const double> x, std::span<double> y) {
    assert(x.size() == y.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += s * x[i];
}

Vector unit_vector(std::size_t n, std::size_t k) {
    Vector e(n, 0.0);
    e.at(k) = 1.0;
    return e;
}

SymMatrix::SymMatrix(Matrix m) {
    if (m.rows() != m.cols()) throw ValidationError("symmetric matrix must be square");
    const double tol = kSymTol * std::max(1.0, max_abs(m));
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = i + 1; j < m.cols(); ++j) {
            if (std::abs(m(i, j) - m(j, i)) > tol) {
                std::ostringstream os;
                os << "matrix is not symmetric: |a(" << i << "," << j << ") - a(" << j << ","
                   << i << ")| = " << std::abs(m(i, j) - m(j, i));
                throw ValidationError(os.str());
            }
            const double avg = 0.5 * (m(i, j) + m(j, i));
            m(i, j) = avg;
            m(j, i) = avg;
        }
    m_ = std::move(m);
}

SymMatrix::SymMatrix(Matrix m, Unchecked) : m_(std::move(m)) {}

SymMatrix SymMatrix::symmetrized(Matrix m) {
    if (m.rows() != m.cols()) throw ValidationError("symmetric matrix must be square");
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = i + 1; j < m.cols(); ++j) {
            const double avg = 0.5 * (m(i, j) + m(j, i));
            m(i, j) = avg;
            m(j, i) = avg;
        }
    return SymMatrix(std::move(m), Unchecked{});
}

Spectrum sym_eigen(const SymMatrix& sym) {
    const std::size_t n = sym.dim();
    Matrix a = sym.matrix();
    Matrix v = Matrix::identity(n);

    const double scale = frobenius_norm(a);
    const double stop = std::max(1e-15 * scale, 1e-300);

    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (std::sqrt(off) <= stop) break;

        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                double t;
                if (std::abs(theta) > 1e150) {
                    t = 0.5 / theta;
                } else {
                    t = (theta >= 0.0 ? 1.0 : -1.0) /
                        (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                }
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });

    Spectrum out;
    out.eigenvalues.resize(n);
    out.eigenvectors = Matrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t src = order[k];
        out.eigenvalues[k] = a(src, src);
        double sign = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (std::abs(v(i, src)) > 1e-10) {
                sign = v(i, src) > 0.0 ? 1.0 : -1.0;
                break;
            }
        }
        for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, k) = sign * v(i, src);
    }
    return out;
}

double lambda_min(const SymMatrix& m) {
    if (m.dim() == 0) throw ValidationError("lambda_min of an empty matrix");
    return sym_eigen(m).eigenvalues.front();
}

Vector solve_spd(const SymMatrix& sym, std::span<const double> b) {
    const std::size_t n = sym.dim();
    if (b.size() != n) throw ValidationError("solve_spd: right-hand side length mismatch");
    require_spd(sym_eigen(sym), "solve_spd");

    const Matrix& m = sym.matrix();
    Matrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = m(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (!(d > 0.0)) {
            throw RankDeficiencyError("solve_spd: Cholesky breakdown", lambda_min(sym));
        }
        l(j, j) = std::sqrt(d);
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = m(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / l(j, j);
        }
    }

    auto cholesky_solve = [&](std::span<const double> rhs) {
        Vector z(rhs.begin(), rhs.end());
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < i; ++k) z[i] -= l(i, k) * z[k];
            z[i] /= l(i, i);
        }
        for (std::size_t i = n; i-- > 0;) {
            for (std::size_t k = i + 1; k < n; ++k) z[i] -= l(k, i) * z[k];
            z[i] /= l(i, i);
        }
        return z;
    };

    Vector x = cholesky_solve(b);
    const Vector r = sub(b, m * x);
    const Vector dx = cholesky_solve(r);
    axpy(1.0, dx, x);
    return x;
}

SymMatrix inv_sqrt_psd(const SymMatrix& sym) {
    const Spectrum s = sym_eigen(sym);
    require_spd(s, "inv_sqrt_psd");
    const std::size_t n = sym.dim();
    Matrix out(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        const double w = 1.0 / std::sqrt(s.eigenvalues[k]);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                out(i, j) += w * s.eigenvectors(i, k) * s.eigenvectors(j, k);
    }
    return SymMatrix::symmetrized(std::move(out));
}

}  // namespace optrec
