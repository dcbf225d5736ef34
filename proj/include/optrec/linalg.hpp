#pragma once

// Dense real linear algebra kernel.
//
// Matrices are small (dimension at most a few dozen) and stored row-major.
// The symmetric eigensolver is a cyclic Jacobi method; every other
// operation that needs spectral information goes through it.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace optrec {

using Vector = std::vector<double>;

class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);
    static Matrix diagonal(std::span<const double> d);
    /// Builds a rows x cols.size() matrix whose j-th column is cols[j].
    static Matrix from_columns(std::size_t rows, const std::vector<Vector>& cols);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<const double> row(std::size_t i) const {
        return {data_.data() + i * cols_, cols_};
    }
    Vector column(std::size_t j) const;
    void set_column(std::size_t j, std::span<const double> v);

    Matrix transposed() const;

    const std::vector<double>& data() const noexcept { return data_; }

    Matrix& operator+=(const Matrix& other);
    Matrix& operator-=(const Matrix& other);
    Matrix& operator*=(double s);

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(double s, Matrix a);
Matrix operator*(const Matrix& a, const Matrix& b);
Vector operator*(const Matrix& a, std::span<const double> x);

/// A^T A.
Matrix gram(const Matrix& a);
/// A^T x.
Vector transpose_times(const Matrix& a, std::span<const double> x);

double frobenius_norm(const Matrix& a);
double max_abs(const Matrix& a);

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);
Vector add(std::span<const double> a, std::span<const double> b);
Vector sub(std::span<const double> a, std::span<const double> b);
Vector scaled(std::span<const double> a, double s);
/// y += s * x
void axpy(double s, std::span<const double> x, std::span<double> y);
Vector unit_vector(std::size_t n, std::size_t k);

/// Square matrix known to be symmetric.
///
/// The checked constructor enforces
/// |a_ij - a_ji| <= 1e-12 * max(1, max|a|) and then stores the exact
/// symmetric part, so downstream code may rely on bitwise symmetry.
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(Matrix m);

    /// Stores (M + M^T)/2 without checking; for matrices symmetric by construction.
    static SymMatrix symmetrized(Matrix m);

    std::size_t dim() const noexcept { return m_.rows(); }
    const Matrix& matrix() const noexcept { return m_; }
    double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }

private:
    struct Unchecked {};
    SymMatrix(Matrix m, Unchecked);
    Matrix m_;
};

struct Spectrum {
    Vector eigenvalues;  // ascending
    Matrix eigenvectors; // orthonormal columns, matching eigenvalues

    Vector eigenvector(std::size_t k) const { return eigenvectors.column(k); }
};

/// Full eigendecomposition by cyclic Jacobi rotations.
///
/// Eigenvalues are sorted ascending (stable for ties). Each eigenvector is
/// normalized so that its first component with magnitude above 1e-10 is
/// positive, which makes the output reproducible across calls.
Spectrum sym_eigen(const SymMatrix& m);

double lambda_min(const SymMatrix& m);

/// Solves M x = b for symmetric positive definite M (Cholesky with one
/// refinement step). Throws RankDeficiencyError when
/// lambda_min(M) <= 1e-12 * lambda_max(M).
Vector solve_spd(const SymMatrix& m, std::span<const double> b);

/// M^{-1/2} for symmetric positive definite M, via the spectral decomposition.
/// Throws RankDeficiencyError when lambda_min(M) <= 1e-12 * lambda_max(M).
SymMatrix inv_sqrt_psd(const SymMatrix& m);

}  // namespace optrec
