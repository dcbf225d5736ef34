#pragma once

// Problem instances for recovery under the approximability model
//   K = { f : dist(f, V) <= epsilon },   y = Lambda f + e,   ||e|| <= eta,
// in the Hilbert space R^N with the Euclidean inner product.

#include <cstddef>

#include "optrec/linalg.hpp"

namespace optrec {

struct ProblemInstance {
    Matrix lambda;   // m x N, rows are the Riesz representers u_i
    Matrix vbasis;   // N x n, columns span V (n may be 0)
    double epsilon = 1.0;
    double eta = 0.0;
    Vector y;        // m

    std::size_t N() const noexcept { return lambda.cols(); }
    std::size_t m() const noexcept { return lambda.rows(); }
    std::size_t n() const noexcept { return vbasis.cols(); }
};

/// Operators derived from a validated instance.
struct Geometry {
    SymMatrix P;      // orthogonal projector onto the complement of V
    SymMatrix LtL;    // Lambda^T Lambda
    Matrix C;         // m x n cross-Gramian, C_ij = <u_i, v_j>
    Matrix basis;     // N x n orthonormal basis of V
    bool orthonormal = false;  // Lambda Lambda^T == Id to 1e-10
};

/// Checks shapes and the standing assumptions and builds the geometry.
///
/// Throws ValidationError for malformed input, a non-positive epsilon or a
/// rank-deficient V basis, and InfiniteWorstCaseError when V meets ker(Lambda)
/// nontrivially (smallest singular value of Lambda*B at most 1e-10).
Geometry validate(const ProblemInstance& p);

struct OrthonormalizedInstance {
    ProblemInstance instance;
    Matrix transform;  // m x m, (Lambda Lambda^T)^{-1/2}
};

/// Replaces Lambda by (Lambda Lambda^T)^{-1/2} Lambda and y accordingly.
///
/// The error bound ||e|| <= eta is not transformed: in the new coordinates
/// the admissible errors form an ellipsoid, and eta is carried over as is.
/// Callers that need the exact error model must re-specify eta.
OrthonormalizedInstance orthonormalize(const ProblemInstance& p);

/// (1 - tau) P + tau Lambda^T Lambda.
SymMatrix blended_operator(const Geometry& g, double tau);

/// Orthonormal basis (N x k) of ker(Lambda); k may be 0.
Matrix observation_kernel(const ProblemInstance& p);

}  // namespace optrec
